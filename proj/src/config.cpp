#include "critgrowth/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "critgrowth/errors.hpp"
#include "critgrowth/spectral.hpp"

namespace critgrowth {

using nlohmann::json;

std::string model_kind(const ModelSpec& spec) {
  switch (spec.index()) {
    case 0: return "gwi";
    case 1: return "sdgw";
    case 2: return "cell_division";
    default: return "table";
  }
}

namespace {

// Typed access into a JSON object with the dotted path kept for errors.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  void require_object() const {
    if (!j_.is_object()) fail("expected an object");
  }
  void require_array() const {
    if (!j_.is_array()) fail("expected an array");
  }
  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_, what); }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  Node at(const char* key) const {
    if (!j_.contains(key)) throw ConfigError(child_path(key), "missing required key");
    return Node(j_.at(key), child_path(key));
  }
  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }
  std::size_t size() const { return j_.size(); }

  void only(std::initializer_list<const char*> keys) const {
    require_object();
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed.count(it.key())) throw ConfigError(child_path(it.key()), "unknown key");
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double x = j_.get<double>();
    if (!std::isfinite(x)) fail("expected a finite number");
    return x;
  }
  std::int64_t integer() const {
    if (j_.is_number_integer()) return j_.get<std::int64_t>();
    if (j_.is_number_float()) {
      const double x = j_.get<double>();
      if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9.2e18)
        return static_cast<std::int64_t>(x);
    }
    fail("expected an integer");
  }
  std::uint64_t unsigned_integer() const {
    if (j_.is_number_unsigned()) return j_.get<std::uint64_t>();
    const auto v = integer();
    if (v < 0) fail("expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::vector<double> numbers() const {
    require_array();
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
    return out;
  }
  State counts() const {
    require_array();
    State out;
    for (std::size_t i = 0; i < size(); ++i) {
      const auto v = at(i).integer();
      if (v < 0) at(i).fail("counts must be non-negative");
      out.push_back(v);
    }
    return out;
  }

 private:
  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  const json& j_;
  std::string path_;
};

PmfSpec read_pmf(const Node& n) {
  n.require_array();
  if (n.size() == 0) n.fail("a PMF needs at least one atom");
  PmfSpec pmf;
  for (std::size_t i = 0; i < n.size(); ++i) {
    Node atom = n.at(i);
    atom.only({"vector", "prob"});
    pmf.support.push_back(atom.at("vector").counts());
    pmf.probs.push_back(atom.at("prob").number());
  }
  return pmf;
}

std::vector<PmfSpec> read_laws(const Node& n) {
  n.require_array();
  if (n.size() == 0) n.fail("need one offspring law per type");
  std::vector<PmfSpec> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(read_pmf(n.at(i)));
  return out;
}

OffspringLaw make_law(const PmfSpec& spec, const std::string& path) {
  try {
    return OffspringLaw(spec.support, spec.probs);
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

std::vector<OffspringLaw> make_laws(const std::vector<PmfSpec>& specs, const std::string& path) {
  std::vector<OffspringLaw> out;
  for (std::size_t i = 0; i < specs.size(); ++i)
    out.push_back(make_law(specs[i], path + "[" + std::to_string(i) + "]"));
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i].dim() != out.size()) {
      std::ostringstream os;
      os << "offspring vectors have length " << out[i].dim() << " but there are " << out.size()
         << " types";
      throw ConfigError(path + "[" + std::to_string(i) + "]", os.str());
    }
  return out;
}

ModelSpec read_model(const Node& n) {
  n.require_object();
  const std::string kind = n.at("kind").string();
  if (kind == "gwi") {
    n.only({"kind", "offspring", "immigration"});
    GwiSpec g;
    g.offspring = read_laws(n.at("offspring"));
    g.immigration = read_pmf(n.at("immigration"));
    return g;
  }
  if (kind == "sdgw") {
    n.only({"kind", "base", "boost", "kappa"});
    SdgwSpec s;
    s.base = read_laws(n.at("base"));
    s.boost = read_laws(n.at("boost"));
    s.kappa = n.at("kappa").number();
    return s;
  }
  if (kind == "cell_division") {
    n.only({"kind", "p", "p_prime", "c1", "c2", "b1", "b2", "beta1", "beta2", "a"});
    CellDivisionParams p;
    p.p = n.at("p").number();
    p.p_prime = n.at("p_prime").number();
    p.c1 = n.at("c1").number();
    p.c2 = n.at("c2").number();
    p.b1 = n.at("b1").number();
    p.b2 = n.at("b2").number();
    if (n.has("beta1")) p.beta1 = n.at("beta1").number();
    if (n.has("beta2")) p.beta2 = n.at("beta2").number();
    if (n.has("a")) {
      Node a = n.at("a");
      a.require_array();
      if (a.size() != 2) a.fail("expected a 2x2 array");
      for (std::size_t i = 0; i < 2; ++i) {
        auto row = a.at(i).numbers();
        if (row.size() != 2) a.at(i).fail("expected two entries");
        p.a[i] = {row[0], row[1]};
      }
    }
    return p;
  }
  if (kind == "table") {
    n.only({"kind", "bands", "alpha", "delta"});
    TableSpec t;
    Node bands = n.at("bands");
    bands.require_array();
    if (bands.size() == 0) bands.fail("need at least one band");
    for (std::size_t i = 0; i < bands.size(); ++i) {
      Node b = bands.at(i);
      b.only({"max_total", "offspring"});
      TableSpec::Band band;
      if (b.has("max_total")) band.max_total = b.at("max_total").number();
      else if (i + 1 < bands.size()) b.fail("max_total is required on every band but the last");
      band.offspring = read_laws(b.at("offspring"));
      t.bands.push_back(std::move(band));
    }
    if (n.has("alpha")) t.alpha = n.at("alpha").number();
    if (n.has("delta")) t.delta = n.at("delta").number();
    return t;
  }
  throw ConfigError(n.path() + ".kind", "unknown model kind '" + kind +
                                            "' (expected gwi, sdgw, cell_division or table)");
}

json pmf_json(const PmfSpec& p) {
  json arr = json::array();
  for (std::size_t i = 0; i < p.support.size(); ++i)
    arr.push_back({{"vector", p.support[i]}, {"prob", p.probs[i]}});
  return arr;
}

json laws_json(const std::vector<PmfSpec>& laws) {
  json arr = json::array();
  for (const auto& l : laws) arr.push_back(pmf_json(l));
  return arr;
}

json model_json(const ModelSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GwiSpec>) {
          return {{"kind", "gwi"}, {"offspring", laws_json(s.offspring)},
                  {"immigration", pmf_json(s.immigration)}};
        } else if constexpr (std::is_same_v<T, SdgwSpec>) {
          return {{"kind", "sdgw"}, {"base", laws_json(s.base)}, {"boost", laws_json(s.boost)},
                  {"kappa", s.kappa}};
        } else if constexpr (std::is_same_v<T, CellDivisionParams>) {
          return {{"kind", "cell_division"}, {"p", s.p}, {"p_prime", s.p_prime},
                  {"c1", s.c1}, {"c2", s.c2}, {"b1", s.b1}, {"b2", s.b2},
                  {"beta1", s.beta1}, {"beta2", s.beta2},
                  {"a", {{s.a[0][0], s.a[0][1]}, {s.a[1][0], s.a[1][1]}}}};
        } else {
          json bands = json::array();
          for (const auto& b : s.bands) {
            json jb = {{"offspring", laws_json(b.offspring)}};
            if (b.max_total) jb["max_total"] = *b.max_total;
            bands.push_back(jb);
          }
          return {{"kind", "table"}, {"bands", bands}, {"alpha", s.alpha}, {"delta", s.delta}};
        }
      },
      spec);
}

void check_positive(const Node& n, double x) {
  if (!(x > 0.0)) n.fail("must be positive");
}

}  // namespace

RunConfig config_from_json(const json& j) {
  Node root(j, "");
  root.only({"model", "spectral", "criterion", "lyapunov", "simulation", "output"});
  RunConfig cfg;
  cfg.model = read_model(root.at("model"));

  if (root.has("spectral")) {
    Node s = root.at("spectral");
    s.only({"tol", "max_iter", "criticality_tol"});
    if (s.has("tol")) check_positive(s.at("tol"), cfg.spectral.tol = s.at("tol").number());
    if (s.has("max_iter")) {
      const auto v = s.at("max_iter").integer();
      if (v <= 0 || v > 1'000'000'000) s.at("max_iter").fail("must be a positive integer");
      cfg.spectral.max_iter = static_cast<int>(v);
    }
    if (s.has("criticality_tol"))
      check_positive(s.at("criticality_tol"), cfg.spectral.criticality_tol = s.at("criticality_tol").number());
  }

  if (root.has("criterion")) {
    Node c = root.at("criterion");
    c.only({"radii", "sigma2", "mc_samples", "stabilization_tol"});
    if (c.has("radii")) {
      cfg.criterion.radii = c.at("radii").numbers();
      const auto& r = cfg.criterion.radii;
      if (r.size() < 3) c.at("radii").fail("need at least three radii");
      for (std::size_t i = 0; i < r.size(); ++i)
        if (!(r[i] > 0.0) || (i > 0 && !(r[i] > r[i - 1])))
          c.at("radii").fail("radii must be positive and strictly increasing");
    }
    if (c.has("sigma2")) {
      const auto mode = c.at("sigma2").string();
      if (mode != "analytic" && mode != "monte_carlo")
        c.at("sigma2").fail("expected 'analytic' or 'monte_carlo'");
      cfg.criterion.sigma2_monte_carlo = mode == "monte_carlo";
    }
    if (c.has("mc_samples")) {
      cfg.criterion.mc_samples = c.at("mc_samples").integer();
      if (cfg.criterion.mc_samples < 2) c.at("mc_samples").fail("must be at least 2");
    }
    if (c.has("stabilization_tol"))
      check_positive(c.at("stabilization_tol"),
                     cfg.criterion.stabilization_tol = c.at("stabilization_tol").number());
  }

  if (root.has("lyapunov")) {
    Node l = root.at("lyapunov");
    l.only({"magnitudes", "off_ray", "perturbation", "phi", "k_max", "samples", "band",
            "moment_k", "transverse_steps", "transverse_samples", "audit_samples"});
    auto& s = cfg.lyapunov;
    if (l.has("magnitudes")) {
      s.magnitudes = l.at("magnitudes").numbers();
      if (s.magnitudes.empty()) l.at("magnitudes").fail("need at least one magnitude");
      for (double m : s.magnitudes)
        if (!(m > 3.0)) l.at("magnitudes").fail("magnitudes must exceed 3");
    }
    if (l.has("off_ray")) s.off_ray = l.at("off_ray").boolean();
    if (l.has("perturbation")) {
      s.perturbation = l.at("perturbation").number();
      if (!(s.perturbation >= 0.0 && s.perturbation < 1.0)) l.at("perturbation").fail("must lie in [0,1)");
    }
    if (l.has("phi")) {
      Node p = l.at("phi");
      p.require_array();
      s.phi.clear();
      for (std::size_t i = 0; i < p.size(); ++i) {
        auto name = p.at(i).string();
        if (name != "log" && name != "invlog") p.at(i).fail("expected 'log' or 'invlog'");
        s.phi.push_back(name);
      }
    }
    if (l.has("k_max")) {
      const auto v = l.at("k_max").integer();
      if (v <= 0 || v > 100000) l.at("k_max").fail("must be a positive integer");
      s.k_max = static_cast<int>(v);
    }
    if (l.has("samples")) {
      s.samples = l.at("samples").integer();
      if (s.samples < 2) l.at("samples").fail("must be at least 2");
    }
    if (l.has("band")) check_positive(l.at("band"), s.band = l.at("band").number());
    if (l.has("moment_k")) {
      Node mk = l.at("moment_k");
      mk.require_array();
      s.moment_k.clear();
      for (std::size_t i = 0; i < mk.size(); ++i) {
        const auto v = mk.at(i).integer();
        if (v <= 0 || v > 100000) mk.at(i).fail("must be a positive integer");
        s.moment_k.push_back(static_cast<int>(v));
      }
    }
    if (l.has("transverse_steps")) {
      const auto v = l.at("transverse_steps").integer();
      if (v < 0 || v > 100000) l.at("transverse_steps").fail("must be a non-negative integer");
      s.transverse_steps = static_cast<int>(v);
    }
    if (l.has("transverse_samples")) {
      s.transverse_samples = l.at("transverse_samples").integer();
      if (s.transverse_samples < 2) l.at("transverse_samples").fail("must be at least 2");
    }
    if (l.has("audit_samples")) {
      s.audit_samples = l.at("audit_samples").integer();
      if (s.audit_samples < 2) l.at("audit_samples").fail("must be at least 2");
    }
  }

  if (root.has("simulation")) {
    Node s = root.at("simulation");
    s.only({"horizon", "n_traj", "seed", "s", "R", "burn_in", "ceiling", "x0", "threads",
            "mixed_max_fraction", "growth_min_fraction"});
    auto& sc = cfg.simulation;
    if (s.has("horizon")) sc.horizon = s.at("horizon").integer();
    if (s.has("n_traj")) sc.n_traj = s.at("n_traj").integer();
    if (s.has("seed")) sc.seed = s.at("seed").unsigned_integer();
    if (s.has("s")) sc.lower = s.at("s").number();
    if (s.has("R")) sc.upper = s.at("R").number();
    if (s.has("burn_in")) sc.burn_in = s.at("burn_in").integer();
    if (s.has("ceiling")) sc.ceiling = s.at("ceiling").integer();
    if (s.has("threads")) sc.threads = static_cast<unsigned>(s.at("threads").unsigned_integer());
    if (s.has("mixed_max_fraction")) sc.mixed_max_fraction = s.at("mixed_max_fraction").number();
    if (s.has("growth_min_fraction")) sc.growth_min_fraction = s.at("growth_min_fraction").number();
    if (s.has("x0")) cfg.x0 = s.at("x0").counts();
    sc.validate();
  }

  if (root.has("output")) {
    Node o = root.at("output");
    o.only({"dir", "format"});
    if (o.has("dir")) cfg.output.dir = o.at("dir").string();
    if (o.has("format")) {
      cfg.output.format = o.at("format").string();
      if (cfg.output.format != "json" && cfg.output.format != "csv" && cfg.output.format != "both")
        o.at("format").fail("expected json, csv or both");
    }
  }

  // Builds the model once so that every PMF, the mean matrix and the standing
  // assumptions are checked at load time.
  auto model = build_model(cfg);
  if (cfg.x0) {
    if (cfg.x0->size() != model->dim())
      throw ConfigError("simulation.x0", "length does not match the model dimension");
    if (model->absorbing_zero() && is_zero(*cfg.x0))
      throw ConfigError("simulation.x0", "the zero state is absorbing for this model");
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON in '") + path + "': " + e.what());
  }
  return config_from_json(j);
}

json to_json(const RunConfig& cfg) {
  json j;
  j["model"] = model_json(cfg.model);
  j["spectral"] = {{"tol", cfg.spectral.tol},
                   {"max_iter", cfg.spectral.max_iter},
                   {"criticality_tol", cfg.spectral.criticality_tol}};
  j["criterion"] = {{"radii", cfg.criterion.radii},
                    {"sigma2", cfg.criterion.sigma2_monte_carlo ? "monte_carlo" : "analytic"},
                    {"mc_samples", cfg.criterion.mc_samples},
                    {"stabilization_tol", cfg.criterion.stabilization_tol}};
  const auto& l = cfg.lyapunov;
  j["lyapunov"] = {{"magnitudes", l.magnitudes},     {"off_ray", l.off_ray},
                   {"perturbation", l.perturbation}, {"phi", l.phi},
                   {"k_max", l.k_max},               {"samples", l.samples},
                   {"band", l.band},                 {"moment_k", l.moment_k},
                   {"transverse_steps", l.transverse_steps},
                   {"transverse_samples", l.transverse_samples},
                   {"audit_samples", l.audit_samples}};
  const auto& s = cfg.simulation;
  json sim = {{"horizon", s.horizon},
              {"n_traj", s.n_traj},
              {"seed", s.seed},
              {"s", s.lower},
              {"R", s.upper},
              {"ceiling", s.ceiling},
              {"threads", s.threads},
              {"mixed_max_fraction", s.mixed_max_fraction},
              {"growth_min_fraction", s.growth_min_fraction}};
  if (s.burn_in) sim["burn_in"] = *s.burn_in;
  if (cfg.x0) sim["x0"] = *cfg.x0;
  j["simulation"] = sim;
  j["output"] = {{"dir", cfg.output.dir}, {"format", cfg.output.format}};
  return j;
}

namespace {

void check_mean_matrix(const NonNegMatrix& m, const std::string& path) {
  if (!is_primitive(m)) {
    std::ostringstream os;
    os << "mean matrix [";
    for (std::size_t i = 0; i < m.dim(); ++i) {
      os << (i ? ", " : "") << "[";
      for (std::size_t k = 0; k < m.dim(); ++k) os << (k ? ", " : "") << m(i, k);
      os << "]";
    }
    os << "] is not primitive (no power up to d^2-2d+2 is entry-wise positive)";
    throw ConfigError(path, os.str());
  }
}

// All states with total population in [1, max_total], d = 2 only.
std::vector<Vec> small_states(std::int64_t max_total) {
  std::vector<Vec> out;
  for (std::int64_t a = 0; a <= max_total; ++a)
    for (std::int64_t b = 0; a + b <= max_total; ++b)
      if (a + b > 0) out.push_back({static_cast<double>(a), static_cast<double>(b)});
  return out;
}

}  // namespace

std::unique_ptr<Model> build_model(const RunConfig& cfg) {
  std::unique_ptr<Model> model = std::visit(
      [](const auto& s) -> std::unique_ptr<Model> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GwiSpec>) {
          auto off = make_laws(s.offspring, "model.offspring");
          auto imm = make_law(s.immigration, "model.immigration");
          if (imm.dim() != off.size())
            throw ConfigError("model.immigration", "vectors must have the model dimension");
          auto m = std::make_unique<GwiModel>(std::move(off), std::move(imm));
          check_mean_matrix(m->mean_matrix(), "model.offspring");
          auto violations = m->standing_assumption_violations();
          if (!violations.empty()) throw ConfigError("model", violations.front());
          return m;
        } else if constexpr (std::is_same_v<T, SdgwSpec>) {
          auto base = make_laws(s.base, "model.base");
          auto boost = make_laws(s.boost, "model.boost");
          try {
            auto m = std::make_unique<MixtureSdgwModel>(std::move(base), std::move(boost), s.kappa);
            check_mean_matrix(m->mean_matrix(), "model.base");
            return m;
          } catch (const DomainError& e) {
            throw ConfigError("model", e.what());
          }
        } else if constexpr (std::is_same_v<T, CellDivisionParams>) {
          std::unique_ptr<CellDivisionModel> m;
          try {
            m = std::make_unique<CellDivisionModel>(s);
          } catch (const DomainError& e) {
            throw ConfigError("model", e.what());
          }
          // states the chain visits first; the correction is largest there
          m->validate_on(small_states(64));
          return m;
        } else {
          std::vector<BandedSdgwModel::Band> bands;
          for (std::size_t i = 0; i < s.bands.size(); ++i) {
            const auto path = "model.bands[" + std::to_string(i) + "].offspring";
            bands.push_back({s.bands[i].max_total.value_or(std::numeric_limits<double>::infinity()), make_laws(s.bands[i].offspring, path)});
          }
          try {
            auto m = std::make_unique<BandedSdgwModel>(std::move(bands), s.alpha, s.delta);
            check_mean_matrix(m->mean_matrix(), "model.bands");
            return m;
          } catch (const DomainError& e) {
            throw ConfigError("model", e.what());
          }
        }
      },
      cfg.model);
  try {
    model->set_population_ceiling(cfg.simulation.ceiling);
  } catch (const DomainError& e) {
    throw ConfigError("simulation.ceiling", e.what());
  }
  return model;
}

}  // namespace critgrowth
