#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "frontlab/errors.hpp"

namespace frontlab::cli {

namespace {

// Input iterator that records how far the parser has read.
class CountingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  CountingIterator(const char* p, const char* base, std::size_t* high) : p_(p), base_(base), high_(high) {}
  reference operator*() const { return *p_; }
  CountingIterator& operator++() {
    ++p_;
    *high_ = std::max(*high_, static_cast<std::size_t>(p_ - base_));
    return *this;
  }
  CountingIterator operator++(int) {
    auto t = *this;
    ++*this;
    return t;
  }
  bool operator==(const CountingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const CountingIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_;
  const char* base_;
  std::size_t* high_;
};

class Reader {
 public:
  Reader(std::string source, std::map<std::string, int> lines) : source_(std::move(source)), lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    std::string where = source_;
    const auto it = lines_.find(path);
    if (it != lines_.end()) where += ":" + std::to_string(it->second);
    throw ConfigError(where + ": field '" + path + "': " + msg);
  }

  void check_keys(const ojson& obj, const std::string& path, std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items()) {
      if (ok.count(k)) continue;
      std::string list;
      for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      fail(join(path, k), "unknown key (allowed: " + list + ")");
    }
  }

  static std::string join(const std::string& path, const std::string& k) { return path.empty() ? k : path + "." + k; }

  double number(const ojson& obj, const std::string& path, const char* key, double def) const {
    if (!obj.contains(key)) return def;
    return number_at(obj.at(key), join(path, key));
  }
  double number_at(const ojson& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "must be a number");
    return v.get<double>();
  }
  std::optional<double> optional_number(const ojson& obj, const std::string& path, const char* key) const {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return number_at(obj.at(key), join(path, key));
  }
  bool boolean(const ojson& obj, const std::string& path, const char* key, bool def) const {
    if (!obj.contains(key)) return def;
    if (!obj.at(key).is_boolean()) fail(join(path, key), "must be true or false");
    return obj.at(key).get<bool>();
  }
  std::string string(const ojson& obj, const std::string& path, const char* key, const std::string& def) const {
    if (!obj.contains(key)) return def;
    if (!obj.at(key).is_string()) fail(join(path, key), "must be a string");
    return obj.at(key).get<std::string>();
  }
  std::vector<double> numbers(const ojson& obj, const std::string& path, const char* key) const {
    if (!obj.contains(key)) return {};
    const auto& v = obj.at(key);
    const std::string p = join(path, key);
    if (!v.is_array()) fail(p, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(number_at(e, p));
    return out;
  }
  void require(bool ok, const std::string& path, const std::string& msg) const {
    if (!ok) fail(path, msg);
  }

 private:
  std::string source_;
  std::map<std::string, int> lines_;
};

FamilySpec read_family(const Reader& r, const ojson& f) {
  r.check_keys(f, "family", {"kind", "coefficients", "gamma0", "s_range"});
  const std::string kind = r.string(f, "family", "kind", "HadelerRothe");
  Interval range{0.0, std::numeric_limits<double>::infinity()};
  if (f.contains("s_range")) {
    const auto v = r.numbers(f, "family", "s_range");
    r.require(v.size() == 2 && v[0] <= v[1] && v[0] >= 0.0, "family.s_range", "must be [lo, hi] with 0 <= lo <= hi");
    range = {v[0], v[1]};
  }
  FamilyKind fk{};
  try {
    fk = family_kind_from_string(kind);
  } catch (const Error& e) {
    r.fail("family.kind", e.what());
  }
  if (fk == FamilyKind::HadelerRothe) {
    r.require(!f.contains("coefficients") && !f.contains("gamma0"), "family",
              "coefficients and gamma0 apply to PolyAffine only");
    return FamilySpec::hadeler_rothe(range);
  }
  r.require(f.contains("coefficients"), "family.coefficients", "required for PolyAffine");
  r.require(f.contains("gamma0"), "family.gamma0", "required for PolyAffine");
  const auto& c = f.at("coefficients");
  r.require(c.is_array() && !c.empty(), "family.coefficients", "must be a non-empty array of [a_j0, a_j1] pairs");
  FamilySpec::Coefficients coeffs;
  for (const auto& row : c) {
    r.require(row.is_array() && row.size() == 2, "family.coefficients", "every row must be a pair [a_j0, a_j1]");
    coeffs.push_back({r.number_at(row[0], "family.coefficients"), r.number_at(row[1], "family.coefficients")});
  }
  const double g0 = r.number(f, "family", "gamma0", 0.0);
  try {
    return FamilySpec::poly_affine(coeffs, g0, range);
  } catch (const Error& e) {
    r.fail("family", e.what());
  }
}

KernelSpec read_kernel(const Reader& r, const ojson& k, const std::filesystem::path& base) {
  r.check_keys(k, "kernel", {"kind", "L", "samples_file"});
  const std::string kind = r.string(k, "kernel", "kind", "Local");
  KernelKind kk{};
  try {
    kk = kernel_kind_from_string(kind);
  } catch (const Error& e) {
    r.fail("kernel.kind", e.what());
  }
  if (kk == KernelKind::Local) {
    r.require(!k.contains("L") && !k.contains("samples_file"), "kernel", "a Local kernel takes no L or samples_file");
    return KernelSpec::local();
  }
  if (kk == KernelKind::Tabulated) {
    r.require(k.contains("samples_file"), "kernel.samples_file", "required for Tabulated");
    r.require(!k.contains("L"), "kernel.L", "L of a Tabulated kernel comes from its samples");
    std::filesystem::path p = r.string(k, "kernel", "samples_file", "");
    if (p.is_relative()) p = base / p;
    r.require(std::filesystem::exists(p), "kernel.samples_file", "file " + p.string() + " does not exist");
    try {
      return KernelSpec::load_tabulated(p);
    } catch (const Error& e) {
      r.fail("kernel.samples_file", e.what());
    }
  }
  r.require(k.contains("L"), "kernel.L", "required for " + kind);
  const double L = r.number(k, "kernel", "L", 0.0);
  r.require(L > 0.0, "kernel.L", "must be positive");
  switch (kk) {
    case KernelKind::Box: return KernelSpec::box(L);
    case KernelKind::Triangle: return KernelSpec::triangle(L);
    default: return KernelSpec::cosine_bump(L);
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source, const std::filesystem::path& base) {
  std::size_t high = 0;
  std::vector<std::string> stack;
  std::map<std::string, int> lines;
  auto line_at = [&](std::size_t pos) {
    pos = std::min(pos, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  };
  auto path_of = [&] {
    std::string p;
    for (const auto& k : stack)
      if (!k.empty()) p += (p.empty() ? "" : ".") + k;
    return p;
  };
  ojson doc;
  try {
    const char* b = text.data();
    doc = ojson::parse(
        CountingIterator(b, b, &high), CountingIterator(b + text.size(), b, &high),
        [&](int, ojson::parse_event_t ev, ojson& parsed) {
          switch (ev) {
            case ojson::parse_event_t::object_start: stack.emplace_back(); break;
            case ojson::parse_event_t::array_start: stack.emplace_back(); break;
            case ojson::parse_event_t::key:
              if (!stack.empty()) {
                stack.back() = parsed.get<std::string>();
                lines.emplace(path_of(), line_at(high));
              }
              break;
            case ojson::parse_event_t::object_end:
            case ojson::parse_event_t::array_end:
              if (!stack.empty()) stack.pop_back();
              break;
            default: break;
          }
          return true;
        });
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source + ":" + std::to_string(line_at(e.byte > 0 ? e.byte - 1 : 0)) + ": malformed JSON: " +
                      e.what());
  }

  const Reader r(source, std::move(lines));
  r.check_keys(doc, "",
               {"family", "kernel", "s", "grid", "wave", "speed_curve", "threshold", "supersol", "output_dir",
                "deterministic"});
  ExperimentConfig cfg;
  cfg.echo = doc;
  if (doc.contains("family")) cfg.family = read_family(r, doc.at("family"));
  if (doc.contains("kernel")) cfg.kernel = read_kernel(r, doc.at("kernel"), base);
  cfg.s = r.optional_number(doc, "", "s");
  if (cfg.s) {
    r.require(*cfg.s >= cfg.family.s_range().lo && *cfg.s <= cfg.family.s_range().hi, "s",
              "outside family.s_range");
  }
  cfg.output_dir = r.string(doc, "", "output_dir", cfg.output_dir);
  cfg.deterministic = r.boolean(doc, "", "deterministic", true);

  if (doc.contains("grid")) {
    const auto& g = doc.at("grid");
    r.check_keys(g, "grid",
                 {"x_min", "x_max", "dx", "dt", "T", "level", "sample_interval", "window", "init", "write_field"});
    auto& G = cfg.grid;
    G.x_min = r.number(g, "grid", "x_min", G.x_min);
    G.x_max = r.number(g, "grid", "x_max", G.x_max);
    G.dx = r.number(g, "grid", "dx", G.dx);
    G.dt = r.number(g, "grid", "dt", G.dt);
    G.T = r.number(g, "grid", "T", G.T);
    G.level = r.number(g, "grid", "level", G.level);
    G.sample_interval = r.number(g, "grid", "sample_interval", G.sample_interval);
    G.write_field = r.boolean(g, "grid", "write_field", G.write_field);
    r.require(G.dx > 0.0, "grid.dx", "must be positive");
    r.require(G.x_max > G.x_min + 16.0 * G.dx, "grid.x_max", "must exceed x_min by at least 16 dx");
    r.require(G.dt >= 0.0, "grid.dt", "must be >= 0 (0 picks a stable step)");
    r.require(G.T > 0.0, "grid.T", "must be positive");
    r.require(G.level > 0.0 && G.level < 1.0, "grid.level", "must lie in (0, 1)");
    r.require(G.sample_interval > 0.0, "grid.sample_interval", "must be positive");
    if (g.contains("window")) {
      const auto w = r.numbers(g, "grid", "window");
      r.require(w.size() == 2 && w[0] >= 0.0 && w[0] < w[1] && w[1] <= G.T, "grid.window",
                "must be [t_lo, t_hi] with 0 <= t_lo < t_hi <= T");
      G.window = std::make_pair(w[0], w[1]);
    }
    if (g.contains("init")) {
      const auto& in = g.at("init");
      r.check_keys(in, "grid.init", {"a", "b", "width"});
      G.init_a = r.number(in, "grid.init", "a", G.init_a);
      G.init_b = r.number(in, "grid.init", "b", G.init_b);
      G.init_width = r.number(in, "grid.init", "width", G.init_width);
      r.require(G.init_a < G.init_b, "grid.init", "needs a < b");
      r.require(G.init_width >= 0.0, "grid.init.width", "must be >= 0");
    }
  }
  if (doc.contains("wave")) {
    const auto& w = doc.at("wave");
    r.check_keys(w, "wave", {"c", "speed_tol", "cross_check"});
    cfg.wave.c = r.optional_number(w, "wave", "c");
    if (cfg.wave.c) r.require(*cfg.wave.c > 0.0, "wave.c", "must be positive");
    cfg.wave.speed_tol = r.number(w, "wave", "speed_tol", 0.0);
    r.require(cfg.wave.speed_tol >= 0.0, "wave.speed_tol", "must be >= 0");
    cfg.wave.cross_check = r.boolean(w, "wave", "cross_check", false);
  }
  if (doc.contains("speed_curve")) {
    const auto& sc = doc.at("speed_curve");
    r.check_keys(sc, "speed_curve", {"s_list", "speed_tol"});
    cfg.speed_curve.s_list = r.numbers(sc, "speed_curve", "s_list");
    r.require(std::is_sorted(cfg.speed_curve.s_list.begin(), cfg.speed_curve.s_list.end()), "speed_curve.s_list",
              "must be sorted ascending");
    cfg.speed_curve.speed_tol = r.number(sc, "speed_curve", "speed_tol", 0.0);
    r.require(cfg.speed_curve.speed_tol >= 0.0, "speed_curve.speed_tol", "must be >= 0");
  }
  if (doc.contains("threshold")) {
    const auto& t = doc.at("threshold");
    r.check_keys(t, "threshold", {"s_lo", "s_hi", "tol_s", "eps_c", "speed_tol", "certificate"});
    auto& T = cfg.threshold;
    T.s_lo = r.number(t, "threshold", "s_lo", T.s_lo);
    T.s_hi = r.number(t, "threshold", "s_hi", T.s_hi);
    T.tol_s = r.number(t, "threshold", "tol_s", T.tol_s);
    T.eps_c = r.number(t, "threshold", "eps_c", T.eps_c);
    T.speed_tol = r.number(t, "threshold", "speed_tol", 0.0);
    T.certificate = r.boolean(t, "threshold", "certificate", true);
    r.require(T.s_lo < T.s_hi, "threshold.s_hi", "must exceed s_lo");
    r.require(T.tol_s > 0.0, "threshold.tol_s", "must be positive");
    r.require(T.eps_c > 0.0, "threshold.eps_c", "must be positive");
    r.require(T.speed_tol >= 0.0, "threshold.speed_tol", "must be >= 0");
  }
  if (doc.contains("supersol")) {
    const auto& s = doc.at("supersol");
    r.check_keys(s, "supersol", {"delta0", "lambda1", "allow_invalid", "dump_csv", "speed_tol"});
    auto& S = cfg.supersol;
    S.delta0 = r.number(s, "supersol", "delta0", S.delta0);
    r.require(S.delta0 >= 0.0, "supersol.delta0", "must be >= 0");
    S.lambda1 = r.optional_number(s, "supersol", "lambda1");
    if (S.lambda1) r.require(*S.lambda1 > 0.0, "supersol.lambda1", "must be positive");
    S.allow_invalid = r.boolean(s, "supersol", "allow_invalid", false);
    S.dump_csv = r.boolean(s, "supersol", "dump_csv", true);
    S.speed_tol = r.number(s, "supersol", "speed_tol", 0.0);
    r.require(S.speed_tol >= 0.0, "supersol.speed_tol", "must be >= 0");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.has_parent_path() ? path.parent_path() : ".");
}

}  // namespace frontlab::cli
