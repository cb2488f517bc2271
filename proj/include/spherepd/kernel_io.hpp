#pragma once

// Text forms of KernelSpec.
//
// Mini-language: kind:key=value,key=value. Lists use ';' and nested kernels
// are bracketed, e.g. scaled:theta=0.5,inner=[trunc-power:theta=1,delta=2].
// Kinds: trunc-power, tabulated, gegenbauer-sum, gaussian, cos, constant,
// zero, scaled, sinc-power.

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "spherepd/kernels.hpp"

namespace spherepd::kernels {

class KernelParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

KernelSpec parse_kernel(std::string_view text);
/// Canonical mini-language; parse_kernel(format_kernel(g)) evaluates identically.
std::string format_kernel(const KernelSpec& g);

KernelSpec kernel_from_json(const nlohmann::json& j);
nlohmann::json kernel_to_json(const KernelSpec& g);

}  // namespace spherepd::kernels
