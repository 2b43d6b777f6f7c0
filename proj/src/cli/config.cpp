#include "secvar/cli/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "secvar/errors.hpp"
#include "secvar/jacobi.hpp"

namespace secvar::cli {

namespace {

using json = nlohmann::json;

// Line of the last key in `path`, found by walking the raw text key by key.
// Zero when the key does not occur literally.
std::size_t line_of(const std::string& text, std::initializer_list<std::string> path) {
  std::size_t pos = 0;
  for (const std::string& key : path) {
    const std::string quoted = "\"" + key + "\"";
    std::size_t hit = std::string::npos;
    for (std::size_t from = pos; (from = text.find(quoted, from)) != std::string::npos; from += quoted.size()) {
      std::size_t after = from + quoted.size();
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == ':') {
        hit = from;
        break;
      }
    }
    if (hit == std::string::npos) return 0;
    pos = hit + quoted.size();
  }
  std::size_t line = 1;
  for (std::size_t k = 0; k < pos && k < text.size(); ++k) line += text[k] == '\n';
  return line;
}

class Reader {
 public:
  Reader(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

  [[noreturn]] void fail(std::initializer_list<std::string> path, const std::string& what,
                         ErrorCategory category = ErrorCategory::validation) const {
    std::string dotted;
    for (const std::string& k : path) dotted += (dotted.empty() ? "" : ".") + k;
    const std::size_t line = line_of(text_, path);
    std::string where = origin_;
    if (line > 0) where += ":" + std::to_string(line);
    throw Error(category, where + ": " + dotted + ": " + what);
  }

  double number(const json& node, std::initializer_list<std::string> path) const {
    if (!node.is_number()) fail(path, "expected a number");
    const double v = node.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
  }

  std::size_t count(const json& node, std::initializer_list<std::string> path) const {
    if (!node.is_number_integer() || node.get<long long>() < 0) fail(path, "expected a non-negative integer");
    return node.get<std::size_t>();
  }

  DenseMatrix matrix(const json& node, std::size_t rows, std::size_t cols,
                     std::initializer_list<std::string> path) const {
    if (!node.is_array()) fail(path, "expected a flat row-major array");
    if (node.size() != rows * cols)
      fail(path, "expected " + std::to_string(rows * cols) + " entries (" + std::to_string(rows) + "x" +
                     std::to_string(cols) + "), got " + std::to_string(node.size()));
    std::vector<double> values;
    values.reserve(node.size());
    for (const json& v : node) values.push_back(number(v, path));
    return DenseMatrix(rows, cols, std::move(values));
  }

  std::vector<DenseMatrix> samples(const json& node, std::size_t nt, std::size_t rows, std::size_t cols,
                                   std::initializer_list<std::string> path) const {
    if (!node.is_array()) fail(path, "expected an array of nt row-major arrays");
    if (node.size() != nt)
      fail(path, "expected nt = " + std::to_string(nt) + " samples, got " + std::to_string(node.size()));
    std::vector<DenseMatrix> out;
    out.reserve(nt);
    for (const json& s : node) out.push_back(matrix(s, rows, cols, path));
    return out;
  }

 private:
  const std::string& text_;
  std::string origin_;
};

const json* member(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

Problem build_problem(const json& pj, ProblemParams& params, double margin, const Reader& in) {
  if (!pj.is_object()) in.fail({"problem"}, "expected an object");
  const json* type = member(pj, "type");
  if (!type || !type->is_string()) in.fail({"problem", "type"}, "expected oscillator, magnetic, lti or sampled");
  params.type = type->get<std::string>();

  auto guarded = [&](std::initializer_list<std::string> path, auto&& build) -> Problem {
    try {
      return build();
    } catch (const Error& e) {
      in.fail(path, e.what(), e.category());
    }
  };

  if (params.type == "oscillator" || params.type == "magnetic") {
    const json* r = member(pj, "r");
    if (!r) in.fail({"problem", "r"}, "missing");
    params.r = in.number(*r, {"problem", "r"});
    return params.type == "oscillator" ? build_oscillator(params.r) : build_magnetic(params.r);
  }
  if (params.type == "lti") {
    const json* m = member(pj, "m");
    if (!m) in.fail({"problem", "m"}, "missing");
    const std::size_t dim = in.count(*m, {"problem", "m"});
    if (dim == 0) in.fail({"problem", "m"}, "must be positive");
    const json* a = member(pj, "A");
    const json* r = member(pj, "R");
    if (!a) in.fail({"problem", "A"}, "missing");
    if (!r) in.fail({"problem", "R"}, "missing");
    params.a = in.matrix(*a, dim, dim, {"problem", "A"});
    params.r_mat = in.matrix(*r, dim, dim, {"problem", "R"});
    if (!is_symmetric(params.a)) in.fail({"problem", "A"}, "A is not symmetric");
    if (!is_symmetric(params.r_mat)) in.fail({"problem", "R"}, "R is not symmetric");
    return guarded({"problem"}, [&] { return build_lti(params.a, params.r_mat); });
  }
  if (params.type == "sampled") {
    std::size_t dims[3] = {0, 0, 0};
    const char* names[3] = {"d", "m", "nt"};
    for (int k = 0; k < 3; ++k) {
      const json* v = member(pj, names[k]);
      if (!v) in.fail({"problem", names[k]}, "missing");
      dims[k] = in.count(*v, {"problem", names[k]});
      if (dims[k] == 0) in.fail({"problem", names[k]}, "must be positive");
    }
    const auto [d, m, nt] = dims;
    for (const char* key : {"H", "Y", "X"})
      if (!member(pj, key)) in.fail({"problem", key}, "missing");
    auto h = in.samples(pj["H"], nt, m, m, {"problem", "H"});
    auto y = in.samples(pj["Y"], nt, d, m, {"problem", "Y"});
    auto x = in.samples(pj["X"], nt, d, m, {"problem", "X"});
    const bool normalized = member(pj, "normalized") && pj["normalized"].is_boolean() && pj["normalized"].get<bool>();
    return guarded({"problem", "H"}, [&] {
      return Problem{CoefficientPath::make_sampled(d, m, std::move(h), std::move(y), std::move(x), margin),
                     normalized, "sampled nt=" + std::to_string(nt)};
    });
  }
  in.fail({"problem", "type"}, "unknown problem type '" + params.type + "'");
}

void apply(MethodSettings& m, const Overrides& o) {
  if (o.steps) m.steps = *o.steps;
  if (o.N) m.N = *o.N;
  if (o.n_terms) m.n_terms = *o.n_terms;
}

std::optional<std::size_t> env_count(const char* suffix) {
  const std::string name = std::string(kEnvPrefix) + suffix;
  const char* raw = std::getenv(name.c_str());
  if (!raw || !*raw) return std::nullopt;
  std::size_t value = 0;
  const char* end = raw + std::char_traits<char>::length(raw);
  const auto [ptr, ec] = std::from_chars(raw, end, value);
  if (ec != std::errc() || ptr != end || value == 0)
    throw ConfigError(name + ": expected a positive integer, got '" + raw + "'");
  return value;
}

}  // namespace

Overrides env_overrides() { return Overrides{env_count("STEPS"), env_count("N"), env_count("N_TERMS")}; }

RunConfig parse_config(const std::string& text, const std::string& origin, const Overrides& env,
                       const Overrides& flags) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  const Reader in(text, origin);
  if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

  MethodSettings method;
  if (const json* mj = member(root, "method")) {
    if (!mj->is_object()) in.fail({"method"}, "expected an object");
    for (const auto& [key, value] : mj->items()) {
      if (key == "steps") method.steps = in.count(value, {"method", "steps"});
      else if (key == "N") method.N = in.count(value, {"method", "N"});
      else if (key == "n_terms") method.n_terms = in.count(value, {"method", "n_terms"});
      else if (key == "nq") method.nq = in.count(value, {"method", "nq"});
      else if (key == "s_grid") method.s_grid = in.count(value, {"method", "s_grid"});
      else if (key == "legendre_margin") method.legendre_margin = in.number(value, {"method", "legendre_margin"});
      else if (key == "s_range") {
        if (!value.is_array() || value.size() != 2) in.fail({"method", "s_range"}, "expected [s_lo, s_hi]");
        method.s_lo = in.number(value[0], {"method", "s_range"});
        method.s_hi = in.number(value[1], {"method", "s_range"});
      } else {
        in.fail({"method", key}, "unknown setting");
      }
    }
  }
  apply(method, env);
  apply(method, flags);

  const json* pj = member(root, "problem");
  if (!pj) throw ConfigError(origin + ": missing 'problem' section");
  if (!(method.legendre_margin >= 0.0)) in.fail({"method", "legendre_margin"}, "must be non-negative");
  ProblemParams params;
  Problem problem = build_problem(*pj, params, method.legendre_margin, in);

  const std::size_t d = problem.path.d();
  if (method.steps < kMinSteps) in.fail({"method", "steps"}, "must be at least " + std::to_string(kMinSteps));
  if (method.N < 4 * d) in.fail({"method", "N"}, "must be at least 4d = " + std::to_string(4 * d));
  if (method.n_terms == 0) in.fail({"method", "n_terms"}, "must be positive");
  if (method.nq == 0) in.fail({"method", "nq"}, "must be positive");
  if (method.s_grid < 2) in.fail({"method", "s_grid"}, "must be at least 2");
  if (!(method.s_lo < method.s_hi)) in.fail({"method", "s_range"}, "s_lo must be below s_hi");

  // Γ₁ must be invertible: the reference control has to be a regular point.
  try {
    (void)gram(problem, method.steps);
  } catch (const Error& e) {
    in.fail({"problem"}, e.what(), e.category());
  }

  OutputSettings output;
  if (const json* oj = member(root, "output")) {
    if (!oj->is_object()) in.fail({"output"}, "expected an object");
    for (const auto& [key, value] : oj->items()) {
      if (!value.is_string()) in.fail({"output", key}, "expected a path string");
      if (key == "report") output.report = value.get<std::string>();
      else if (key == "spectrum_csv") output.spectrum_csv = value.get<std::string>();
      else in.fail({"output", key}, "unknown output");
    }
  }

  std::vector<IdentityRequest> identities;
  if (const json* ij = member(root, "identities")) {
    if (!ij->is_array()) in.fail({"identities"}, "expected an array");
    for (const json& item : *ij) {
      if (!item.is_object() || !member(item, "kind") || !item["kind"].is_string())
        in.fail({"identities"}, "each entry needs a string 'kind'");
      IdentityRequest req{item["kind"].get<std::string>()};
      if (req.kind != "euler_interp") in.fail({"identities", "kind"}, "unknown identity '" + req.kind + "'");
      for (const char* key : {"a", "b"})
        if (!member(item, key)) in.fail({"identities", key}, "missing");
      req.a = in.number(item["a"], {"identities", "a"});
      req.b = in.number(item["b"], {"identities", "b"});
      identities.push_back(std::move(req));
    }
  }

  for (const auto& [key, value] : root.items())
    if (key != "problem" && key != "method" && key != "output" && key != "identities")
      in.fail({key}, "unknown section");

  return RunConfig{std::move(params), std::move(problem), method, std::move(output), std::move(identities), origin};
}

RunConfig load_config(const std::string& path, const Overrides& env, const Overrides& flags) {
  std::ifstream file(path);
  if (!file) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_config(buffer.str(), path, env, flags);
}

}  // namespace secvar::cli
