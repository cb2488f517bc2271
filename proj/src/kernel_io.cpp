#include "spherepd/kernel_io.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <vector>

namespace spherepd::kernels {

namespace {

using Fields = std::map<std::string, std::string, std::less<>>;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Splits on sep at bracket depth zero.
std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '[') ++depth;
    if (s[i] == ']' && --depth < 0) throw KernelParseError("unbalanced ']' in kernel string");
    if (s[i] == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (depth != 0) throw KernelParseError("unbalanced '[' in kernel string");
  out.push_back(trim(s.substr(start)));
  return out;
}

double to_double(std::string_view key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc{} || p != end || v.empty()) {
    throw KernelParseError("kernel field '" + std::string(key) + "': not a number: '" + v + "'");
  }
  return x;
}

std::vector<double> to_list(std::string_view key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_top(v, ';')) out.push_back(to_double(key, item));
  return out;
}

class FieldReader {
 public:
  FieldReader(std::string kind, Fields f) : kind_(std::move(kind)), f_(std::move(f)) {}

  const std::string& raw(std::string_view key) {
    auto it = f_.find(key);
    if (it == f_.end()) throw KernelParseError(kind_ + ": missing field '" + std::string(key) + "'");
    used_.push_back(std::string(key));
    return it->second;
  }
  bool has(std::string_view key) const { return f_.find(key) != f_.end(); }
  double num(std::string_view key) { return to_double(key, raw(key)); }
  std::vector<double> list(std::string_view key) { return to_list(key, raw(key)); }

  void finish() const {
    for (const auto& [k, v] : f_) {
      if (std::find(used_.begin(), used_.end(), k) == used_.end()) {
        throw KernelParseError(kind_ + ": unknown field '" + k + "'");
      }
    }
  }

 private:
  std::string kind_;
  Fields f_;
  std::vector<std::string> used_;
};

std::string unbracket(const std::string& v) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    throw KernelParseError("nested kernel must be bracketed: '" + v + "'");
  }
  return v.substr(1, v.size() - 2);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ';';
    s += fmt(xs[i]);
  }
  return s;
}

int to_dimension(double x) {
  if (x != static_cast<int>(x) || x < 1) throw KernelParseError("sinc-power: d must be a positive integer");
  return static_cast<int>(x);
}

Interpolation to_interp(const std::string& v) {
  if (v == "cubic") return Interpolation::MonotoneCubic;
  if (v == "linear") return Interpolation::Linear;
  throw KernelParseError("tabulated: interp must be cubic or linear, got '" + v + "'");
}

KernelSpec build(const std::string& kind, FieldReader& r) {
  auto done = [&](KernelSpec g) {
    r.finish();
    return g;
  };
  try {
    if (kind == "trunc-power") {
      const double theta = r.num("theta"), delta = r.num("delta");
      return done(KernelSpec::truncated_power(theta, delta));
    }
    if (kind == "tabulated") {
      auto nodes = r.list("nodes");
      auto values = r.list("values");
      const auto interp = r.has("interp") ? to_interp(r.raw("interp")) : Interpolation::MonotoneCubic;
      return done(KernelSpec::tabulated(std::move(nodes), std::move(values), interp));
    }
    if (kind == "gegenbauer-sum") {
      const double lambda = r.num("lambda");
      return done(KernelSpec::gegenbauer_sum(lambda, r.list("coeffs")));
    }
    if (kind == "gaussian") {
      const double scale = r.num("scale"), cutoff = r.num("cutoff");
      return done(KernelSpec::gaussian(scale, cutoff));
    }
    if (kind == "cos") return done(KernelSpec::cosine());
    if (kind == "zero") return done(KernelSpec::zero());
    if (kind == "constant") return done(KernelSpec::constant(r.num("value")));
    if (kind == "scaled") {
      const double theta = r.num("theta");
      return done(scale_kernel(parse_kernel(unbracket(r.raw("inner"))), theta));
    }
    if (kind == "sinc-power") {
      const int d = to_dimension(r.num("d"));
      return done(sinc_power_transform(parse_kernel(unbracket(r.raw("inner"))), d));
    }
  } catch (const KernelParseError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw KernelParseError(e.what());
  }
  throw KernelParseError("unknown kernel kind '" + kind + "'");
}

}  // namespace

KernelSpec parse_kernel(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) throw KernelParseError("empty kernel string");
  const auto colon = s.find(':');
  const std::string kind = trim(s.substr(0, colon));
  Fields fields;
  if (colon != std::string::npos) {
    for (const auto& item : split_top(std::string_view(s).substr(colon + 1), ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw KernelParseError("kernel field without '=': '" + item + "'");
      auto key = trim(item.substr(0, eq));
      if (!fields.emplace(key, trim(item.substr(eq + 1))).second) {
        throw KernelParseError("duplicate kernel field '" + key + "'");
      }
    }
  }
  FieldReader r(kind, std::move(fields));
  return build(kind, r);
}

std::string format_kernel(const KernelSpec& g) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, TruncatedPower>) {
          return "trunc-power:theta=" + fmt(k.theta) + ",delta=" + fmt(k.delta);
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          return "tabulated:nodes=" + fmt_list(k.nodes) + ",values=" + fmt_list(k.values) +
                 ",interp=" + (k.interpolation == Interpolation::Linear ? "linear" : "cubic");
        } else if constexpr (std::is_same_v<T, SincPower>) {
          return "sinc-power:d=" + std::to_string(k.d) + ",inner=[" + format_kernel(*k.inner) + "]";
        } else if constexpr (std::is_same_v<T, Scaled>) {
          return "scaled:theta=" + fmt(k.theta) + ",inner=[" + format_kernel(*k.inner) + "]";
        } else if constexpr (std::is_same_v<T, GegenbauerSum>) {
          return "gegenbauer-sum:lambda=" + fmt(k.lambda) + ",coeffs=" + fmt_list(k.coefficients);
        } else {
          return "gaussian:scale=" + fmt(k.scale) + ",cutoff=" + fmt(k.cutoff);
        }
      },
      g.variant());
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_kernel(j.get<std::string>());
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw KernelParseError("kernel JSON must be a string or an object with a 'kind' field");
  }
  const auto kind = j["kind"].get<std::string>();
  Fields fields;
  for (const auto& [key, v] : j.items()) {
    if (key == "kind") continue;
    if (key == "inner") {
      fields[key] = "[" + format_kernel(kernel_from_json(v)) + "]";
    } else if (v.is_array()) {
      std::vector<double> xs;
      for (const auto& x : v) {
        if (!x.is_number()) throw KernelParseError("kernel field '" + key + "' must hold numbers");
        xs.push_back(x.get<double>());
      }
      fields[key] = fmt_list(xs);
    } else if (v.is_number()) {
      fields[key] = fmt(v.get<double>());
    } else if (v.is_string()) {
      fields[key] = v.get<std::string>();
    } else {
      throw KernelParseError("kernel field '" + key + "' has an unsupported type");
    }
  }
  FieldReader r(kind, std::move(fields));
  return build(kind, r);
}

nlohmann::json kernel_to_json(const KernelSpec& g) {
  return std::visit(
      [](const auto& k) -> nlohmann::json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, TruncatedPower>) {
          return {{"kind", "trunc-power"}, {"theta", k.theta}, {"delta", k.delta}};
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          return {{"kind", "tabulated"},
                  {"nodes", k.nodes},
                  {"values", k.values},
                  {"interp", k.interpolation == Interpolation::Linear ? "linear" : "cubic"}};
        } else if constexpr (std::is_same_v<T, SincPower>) {
          return {{"kind", "sinc-power"}, {"d", k.d}, {"inner", kernel_to_json(*k.inner)}};
        } else if constexpr (std::is_same_v<T, Scaled>) {
          return {{"kind", "scaled"}, {"theta", k.theta}, {"inner", kernel_to_json(*k.inner)}};
        } else if constexpr (std::is_same_v<T, GegenbauerSum>) {
          return {{"kind", "gegenbauer-sum"}, {"lambda", k.lambda}, {"coeffs", k.coefficients}};
        } else {
          return {{"kind", "gaussian"}, {"scale", k.scale}, {"cutoff", k.cutoff}};
        }
      },
      g.variant());
}

}  // namespace spherepd::kernels
