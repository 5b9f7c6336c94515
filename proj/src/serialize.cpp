#include "lieexp/serialize.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace lieexp {

using nlohmann::json;

namespace {

Number number_from_json(const json& j, const char* field) {
  if (j.is_number_integer()) return Number(Rational(j.get<long>()));
  if (j.is_number()) return Number(j.get<double>());
  if (j.is_string()) return Number::parse(j.get<std::string>());
  throw ValidationError(std::string("module.") + field + ": expected a number or a rational string");
}

int int_field(const json& j, const char* field, int fallback) {
  if (!j.contains(field)) return fallback;
  if (!j[field].is_number_integer()) throw ValidationError(std::string("module.") + field + ": expected an integer");
  return j[field].get<int>();
}

}  // namespace

json to_json(const CentralElement& x) {
  json modes = json::array();
  for (const auto& [n, a] : x.vect.coeffs) {
    if (a == cplx{}) continue;
    modes.push_back({{"n", n}, {"re", a.real()}, {"im", a.imag()}});
  }
  if (x.kind == AlgebraKind::Loop && x.loop.algebra) {
    for (const auto& [n, v] : x.loop.coeffs)
      for (int i = 0; i < x.loop.algebra->dim; ++i) {
        cplx a = v[static_cast<size_t>(i)];
        if (a == cplx{}) continue;
        modes.push_back({{"n", n}, {"x", x.loop.algebra->labels[static_cast<size_t>(i)]},
                         {"re", a.real()}, {"im", a.imag()}});
      }
  }
  json j = {{"kind", x.kind == AlgebraKind::Vect ? "vect" : "loop"},
            {"modes", modes},
            {"central", x.central.real()}};
  if (x.central.imag() != 0) j["central_im"] = x.central.imag();
  if (x.central_vir != cplx{}) j["central_vir"] = {x.central_vir.real(), x.central_vir.imag()};
  return j;
}

CentralElement element_from_json(const nlohmann::json& j, const AlgebraPtr& loop_algebra) {
  if (!j.is_object()) throw ValidationError("element: expected an object");
  std::string kind = j.value("kind", "vect");
  CentralElement x;
  if (kind == "vect") {
    x.kind = AlgebraKind::Vect;
  } else if (kind == "loop") {
    x.kind = AlgebraKind::Loop;
    x.loop.algebra = loop_algebra ? loop_algebra : FiniteLieAlgebra::sl2();
  } else {
    throw ValidationError("element.kind: expected \"vect\" or \"loop\", got \"" + kind + "\"");
  }
  if (j.contains("modes")) {
    if (!j["modes"].is_array()) throw ValidationError("element.modes: expected an array");
    for (const auto& m : j["modes"]) {
      if (!m.contains("n") || !m["n"].is_number_integer())
        throw ValidationError("element.modes[].n: expected an integer");
      int n = m["n"].get<int>();
      cplx a{m.value("re", 0.0), m.value("im", 0.0)};
      if (m.contains("x")) {
        if (x.kind != AlgebraKind::Loop) throw ValidationError("element.modes[].x only valid for loop elements");
        int i = x.loop.algebra->index_of(m["x"].get<std::string>());
        x.loop += LoopElement::basis(x.loop.algebra, i, n, a);
      } else {
        x.vect += VectField::mode(n, a);
      }
    }
  }
  x.central = cplx{j.value("central", 0.0), j.value("central_im", 0.0)};
  return x;
}

json spec_to_json(const HighestWeightSpec& s) {
  if (s.kind == ModuleKind::Virasoro)
    return {{"kind", "virasoro"}, {"c", s.c.to_string()}, {"h", s.h.to_string()}, {"N", s.N}};
  return {{"kind", "affine-sl2"}, {"ell", s.ell}, {"lambda", s.lambda}, {"N", s.N}};
}

HighestWeightSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("module: expected an object");
  const std::string kind = j.value("kind", "virasoro");
  HighestWeightSpec s;
  if (kind == "virasoro") {
    s.kind = ModuleKind::Virasoro;
    if (!j.contains("c") || !j.contains("h")) throw ValidationError("module: virasoro needs c and h");
    s.c = number_from_json(j["c"], "c");
    s.h = number_from_json(j["h"], "h");
  } else if (kind == "affine-sl2") {
    s.kind = ModuleKind::AffineSL2;
    s.ell = int_field(j, "ell", 1);
    s.lambda = int_field(j, "lambda", 0);
  } else {
    throw ValidationError("module.kind: expected \"virasoro\" or \"affine-sl2\", got \"" + kind + "\"");
  }
  s.N = int_field(j, "N", 8);
  s.validate();
  return s;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string spec_key(const HighestWeightSpec& s) { return fnv1a_hex(s.canonical()); }

// ---------------------------------------------------------------------------
// Module artifacts

namespace {

json block_json(const std::string& gen, int mode, int from, const MatrixXd& b) {
  std::vector<double> data;
  data.reserve(static_cast<size_t>(b.size()));
  for (Eigen::Index r = 0; r < b.rows(); ++r)
    for (Eigen::Index c = 0; c < b.cols(); ++c) data.push_back(b(r, c));
  return {{"gen", gen}, {"mode", mode}, {"from", from}, {"rows", b.rows()}, {"cols", b.cols()}, {"data", data}};
}

}  // namespace

json module_to_json(const GradedModule& m) {
  json blocks = json::array();
  const int N = m.N();
  static const char* names[3] = {"e", "h", "f"};
  if (m.is_affine()) {
    // Currents for modes 0..N; negative modes are adjoints, Sugawara is rebuilt.
    for (int x = 0; x < 3; ++x)
      for (int n = 0; n <= N; ++n)
        for (int k = n; k <= N; ++k) {
          MatrixXd b = m.block(m.x(x, n), k - n, k);
          if (b.size() > 0) blocks.push_back(block_json(names[x], n, k, b));
        }
  } else {
    for (int n = 1; n <= N; ++n)
      for (int k = n; k <= N; ++k) {
        MatrixXd b = m.block(m.L(n), k - n, k);
        if (b.size() > 0) blocks.push_back(block_json("L", n, k, b));
      }
  }
  return {{"schema", "lieexp.module/1"},
          {"spec", spec_to_json(m.spec)},
          {"key", spec_key(m.spec)},
          {"h0", m.h0},
          {"c_value", m.c_value},
          {"ell_value", m.ell_value},
          {"l0_shift", m.l0_shift},
          {"levels", m.dims},
          {"null_counts", m.null_counts},
          {"blocks", blocks}};
}

GradedModule module_from_json(const json& j) {
  if (j.value("schema", "") != "lieexp.module/1") throw ValidationError("module artifact: unknown schema");
  GradedModule m;
  m.spec = spec_from_json(j.at("spec"));
  m.dims = j.at("levels").get<std::vector<int>>();
  m.null_counts = j.value("null_counts", std::vector<int>(m.dims.size(), 0));
  m.h0 = j.at("h0").get<double>();
  m.c_value = j.at("c_value").get<double>();
  m.ell_value = j.at("ell_value").get<double>();
  m.l0_shift = j.at("l0_shift").get<double>();
  m.offsets.assign(m.dims.size(), 0);
  int acc = 0;
  for (size_t k = 0; k < m.dims.size(); ++k) {
    m.offsets[k] = acc;
    acc += m.dims[k];
  }
  m.total = acc;
  const int N = m.N();
  auto place = [&](MatrixXd& op, const json& b) {
    const int n = b.at("mode").get<int>();
    const int k = b.at("from").get<int>();
    const auto rows = b.at("rows").get<Eigen::Index>();
    const auto cols = b.at("cols").get<Eigen::Index>();
    const auto& data = b.at("data");
    if (rows != m.dims[static_cast<size_t>(k - n)] || cols != m.dims[static_cast<size_t>(k)])
      throw ValidationError("module artifact: block shape does not match level dims");
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        op(m.offsets[static_cast<size_t>(k - n)] + r, m.offsets[static_cast<size_t>(k)] + c) =
            data[static_cast<size_t>(r * cols + c)].get<double>();
  };
  if (m.spec.kind == ModuleKind::AffineSL2) {
    m.x_ops.assign(3, std::vector<MatrixXd>(static_cast<size_t>(2 * N + 1), MatrixXd::Zero(m.total, m.total)));
    for (const auto& b : j.at("blocks")) {
      const std::string g = b.at("gen").get<std::string>();
      const int x = g == "e" ? 0 : g == "h" ? 1 : 2;
      place(m.x_ops[static_cast<size_t>(x)][static_cast<size_t>(N + b.at("mode").get<int>())], b);
    }
    for (int n = 1; n <= N; ++n)
      for (int x = 0; x < 3; ++x)
        m.x_ops[static_cast<size_t>(x)][static_cast<size_t>(N - n)] =
            m.x_ops[static_cast<size_t>(2 - x)][static_cast<size_t>(N + n)].transpose();
    m.l_ops = sugawara(m, m.spec.ell);
  } else {
    m.l_ops.assign(static_cast<size_t>(2 * N + 1), MatrixXd::Zero(m.total, m.total));
    for (const auto& b : j.at("blocks")) place(m.l_ops[static_cast<size_t>(N + b.at("mode").get<int>())], b);
    for (int n = 1; n <= N; ++n)
      m.l_ops[static_cast<size_t>(N - n)] = m.l_ops[static_cast<size_t>(N + n)].transpose();
    m.l_ops[static_cast<size_t>(N)] = m.l0_diagonal().asDiagonal();
  }
  m.has_virasoro = true;
  return m;
}

std::optional<std::string> cache_dir_from_env() {
  const char* d = std::getenv("LIEEXP_CACHE_DIR");
  if (d == nullptr || *d == '\0') return std::nullopt;
  return std::string(d);
}

ModulePtr load_or_build(const HighestWeightSpec& s, const std::optional<std::string>& cache_dir,
                        bool* from_cache) {
  if (from_cache) *from_cache = false;
  if (!cache_dir) return build_module(s);
  namespace fs = std::filesystem;
  const fs::path file = fs::path(*cache_dir) / ("module-" + spec_key(s) + ".json");
  if (fs::exists(file)) {
    std::ifstream in(file);
    json j = json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.value("key", "") == spec_key(s)) {
      auto m = std::make_shared<const GradedModule>(module_from_json(j));
      if (m->spec.canonical() == s.canonical()) {
        if (from_cache) *from_cache = true;
        return m;
      }
    }
  }
  ModulePtr m = build_module(s);
  fs::create_directories(file.parent_path());
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << module_to_json(*m).dump();
  }
  fs::rename(tmp, file);
  return m;
}

}  // namespace lieexp
