// error.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// \file
// Error codes shared by every locent component.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace locent {

enum class errc {
  invalid_automaton,
  singular_system,
  symbol_out_of_range,
  zero_mass_prefix,
  zero_mass_infix,
  nondeterministic_unsupported,
  budget_exceeded,
  zero_total_mass,
  sizes_exceed_corpus,
  sample_length_cap_exceeded,
  invalid_window_size,
  empty_corpus_windows,
  zero_probability_event,
  context_too_long,
  degenerate_input,
  invalid_argument,
  parse_error,
  io_error,
};

constexpr std::string_view errc_name(errc code) {
  switch (code) {
    case errc::invalid_automaton: return "InvalidAutomaton";
    case errc::singular_system: return "SingularSystem";
    case errc::symbol_out_of_range: return "SymbolOutOfRange";
    case errc::zero_mass_prefix: return "ZeroMassPrefix";
    case errc::zero_mass_infix: return "ZeroMassInfix";
    case errc::nondeterministic_unsupported: return "NondeterministicUnsupported";
    case errc::budget_exceeded: return "BudgetExceeded";
    case errc::zero_total_mass: return "ZeroTotalMass";
    case errc::sizes_exceed_corpus: return "SizesExceedCorpus";
    case errc::sample_length_cap_exceeded: return "SampleLengthCapExceeded";
    case errc::invalid_window_size: return "InvalidWindowSize";
    case errc::empty_corpus_windows: return "EmptyCorpusWindows";
    case errc::zero_probability_event: return "ZeroProbabilityEvent";
    case errc::context_too_long: return "ContextTooLong";
    case errc::degenerate_input: return "DegenerateInput";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::parse_error: return "ParseError";
    case errc::io_error: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace locent
