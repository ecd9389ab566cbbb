#include "scalefree/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "json_util.hpp"

namespace scalefree {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (!path.parent_path().empty()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write file: " + path.string());
  }
  out << content;
  if (!out) {
    throw ConfigError("write failed: " + path.string());
  }
}

namespace {

using detail::json;

std::string expect_string(const json& j, const std::string& what) {
  if (!j.is_string()) {
    throw ConfigError(what + ": expected a string");
  }
  return j.get<std::string>();
}

bool expect_bool(const json& j, const std::string& what) {
  if (!j.is_boolean()) {
    throw ConfigError(what + ": expected true or false");
  }
  return j.get<bool>();
}

LtiSystem system_from_json(const json& j, const std::string& what) {
  if (!j.is_object()) {
    throw ConfigError(what + ": expected a system object");
  }
  return parse_system_file(j.dump());
}

void reject_key(const json& doc, const char* key, const std::string& why) {
  if (doc.contains(key)) {
    throw ConfigError("experiment config: key '" + std::string(key) + "' " + why);
  }
}

}  // namespace

ExperimentConfig parse_experiment(const std::string& text,
                                  const fs::path& base_dir) {
  const json doc = detail::parse_json(text, "experiment config");
  detail::require_allowed_keys(
      doc,
      {"protocol", "graph", "graph_file", "agent", "agent_file", "agents",
       "agent_files", "gains", "target", "exosystem", "rootset", "horizon",
       "seed", "tol", "x0", "exo_x0", "allow_unverified"},
      "experiment config");

  ExperimentConfig cfg;
  cfg.kind = protocol_kind_from_index(detail::as_int(
      detail::require_key(doc, "protocol", "experiment config"), "protocol"));
  const bool heterogeneous = cfg.kind == ProtocolKind::kOutputSync ||
                             cfg.kind == ProtocolKind::kRegulatedSync;
  const bool regulated = cfg.kind == ProtocolKind::kRegulatedSync;

  if (doc.contains("graph") == doc.contains("graph_file")) {
    throw ConfigError(
        "experiment config: give exactly one of 'graph' and 'graph_file'");
  }
  const GraphFile gf =
      doc.contains("graph")
          ? parse_graph_file(doc.at("graph").dump())
          : parse_graph_file(read_text_file(
                base_dir / expect_string(doc.at("graph_file"), "graph_file")));
  cfg.graph = gf.graph;

  if (heterogeneous) {
    reject_key(doc, "agent", "does not apply to protocols 3 and 4; use 'agents'");
    reject_key(doc, "agent_file",
               "does not apply to protocols 3 and 4; use 'agent_files'");
    if (doc.contains("agents") == doc.contains("agent_files")) {
      throw ConfigError(
          "experiment config: give exactly one of 'agents' and 'agent_files'");
    }
    if (doc.contains("agents")) {
      const json& list = doc.at("agents");
      if (!list.is_array() || list.empty()) {
        throw ConfigError("experiment config: 'agents' must be a nonempty list");
      }
      for (std::size_t i = 0; i < list.size(); ++i) {
        cfg.agents.push_back(
            system_from_json(list[i], "agents[" + std::to_string(i + 1) + "]"));
      }
    } else {
      const json& list = doc.at("agent_files");
      if (!list.is_array() || list.empty()) {
        throw ConfigError(
            "experiment config: 'agent_files' must be a nonempty list");
      }
      for (const json& entry : list) {
        cfg.agents.push_back(parse_system_file(
            read_text_file(base_dir / expect_string(entry, "agent_files entry"))));
      }
    }
  } else {
    reject_key(doc, "agents", "applies to protocols 3 and 4 only; use 'agent'");
    reject_key(doc, "agent_files",
               "applies to protocols 3 and 4 only; use 'agent_file'");
    if (doc.contains("agent") == doc.contains("agent_file")) {
      throw ConfigError(
          "experiment config: give exactly one of 'agent' and 'agent_file'");
    }
    if (doc.contains("agent")) {
      cfg.agents.push_back(system_from_json(doc.at("agent"), "agent"));
    } else {
      cfg.agents.push_back(parse_system_file(read_text_file(
          base_dir / expect_string(doc.at("agent_file"), "agent_file"))));
    }
  }

  if (doc.contains("gains")) {
    const json& g = doc.at("gains");
    // rho_* are informational outputs of the design command; tolerated on
    // input so its files can be pasted back, but always recomputed.
    detail::require_allowed_keys(g, {"K", "H", "rho_control", "rho_observer"},
                                 "gains");
    cfg.gain_k = detail::as_matrix(detail::require_key(g, "K", "gains"), "gains.K");
    if (cfg.kind == ProtocolKind::kFullState) {
      if (g.contains("H")) {
        throw ConfigError("gains: protocol 1 uses no observer gain 'H'");
      }
    } else {
      cfg.gain_h = detail::as_matrix(detail::require_key(g, "H", "gains"), "gains.H");
    }
  }

  if (doc.contains("target")) {
    if (!heterogeneous) {
      throw ConfigError(
          "experiment config: 'target' applies to protocols 3 and 4 only");
    }
    const json& t = doc.at("target");
    detail::require_allowed_keys(t, {"nq"}, "target");
    const int nq = detail::as_int(detail::require_key(t, "nq", "target"), "target.nq");
    if (nq < 1) {
      throw ConfigError("target.nq: must be at least 1");
    }
    cfg.target_nq = nq;
  }

  if (regulated) {
    const json& e = detail::require_key(doc, "exosystem", "experiment config");
    detail::require_allowed_keys(e, {"Ar", "Cr"}, "exosystem");
    cfg.exo_Ar = detail::as_matrix(detail::require_key(e, "Ar", "exosystem"),
                                   "exosystem.Ar");
    cfg.exo_Cr = detail::as_matrix(detail::require_key(e, "Cr", "exosystem"),
                                   "exosystem.Cr");
  } else {
    reject_key(doc, "exosystem", "applies to protocol 4 only");
    reject_key(doc, "exo_x0", "applies to protocol 4 only");
  }

  // The config-level rootset wins over one in the graph file; kinds 1-3
  // ignore a graph-file rootset, since graph files are shared assets.
  if (regulated) {
    if (doc.contains("rootset")) {
      const json& r = doc.at("rootset");
      if (!r.is_array() || r.empty()) {
        throw ConfigError(
            "rootset: must be a nonempty list of 1-based node indices");
      }
      for (const json& v : r) {
        const int node = detail::as_int(v, "rootset entry");
        if (node < 1 || node > cfg.graph.size()) {
          throw ConfigError("rootset: node " + std::to_string(node) +
                            " out of range 1.." + std::to_string(cfg.graph.size()));
        }
        cfg.rootset.push_back(node - 1);
      }
    } else if (!gf.rootset.empty()) {
      cfg.rootset = gf.rootset;
    } else {
      throw ConfigError("experiment config: protocol 4 needs a 'rootset' "
                        "(here or in the graph file)");
    }
  } else {
    reject_key(doc, "rootset", "applies to protocol 4 only");
  }

  if (doc.contains("horizon")) {
    cfg.horizon = detail::as_int(doc.at("horizon"), "horizon");
    if (cfg.horizon < 0) {
      throw ConfigError("horizon: must be nonnegative");
    }
  }
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (s.is_number_unsigned()) {
      cfg.seed = s.get<std::uint64_t>();
    } else if (s.is_number_integer() && s.get<long long>() >= 0) {
      cfg.seed = static_cast<std::uint64_t>(s.get<long long>());
    } else {
      throw ConfigError("seed: must be a nonnegative integer");
    }
  }
  if (doc.contains("tol")) {
    cfg.tol = detail::as_number(doc.at("tol"), "tol");
    if (!(cfg.tol > 0.0)) {
      throw ConfigError("tol: must be positive");
    }
  }
  if (doc.contains("x0")) {
    const json& x = doc.at("x0");
    if (!x.is_array()) {
      throw ConfigError("x0: expected one list per agent");
    }
    std::vector<Vector> states;
    for (std::size_t i = 0; i < x.size(); ++i) {
      states.push_back(
          detail::as_vector(x[i], "x0[" + std::to_string(i + 1) + "]"));
    }
    cfg.x0 = std::move(states);
  }
  if (doc.contains("exo_x0")) {
    cfg.exo_x0 = detail::as_vector(doc.at("exo_x0"), "exo_x0");
  }
  if (doc.contains("allow_unverified")) {
    cfg.allow_unverified =
        expect_bool(doc.at("allow_unverified"), "allow_unverified");
  }

  if (heterogeneous &&
      static_cast<int>(cfg.agents.size()) != cfg.graph.size()) {
    throw ConfigError("experiment config: " + std::to_string(cfg.agents.size()) +
                      " agents for a graph with " +
                      std::to_string(cfg.graph.size()) + " nodes");
  }
  return cfg;
}

ExperimentConfig load_experiment_file(const fs::path& path) {
  return parse_experiment(read_text_file(path), path.parent_path());
}

namespace {

// Smallest admissible homogenized dimension: every agent's relative degree
// must fit, and for regulated protocols so must the exosystem order.
int required_target_dim(const ExperimentConfig& cfg) {
  int min_nq = 1;
  for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
    const StructureReport rep = analyze(cfg.agents[i]);
    if (!rep.relative_degree) {
      throw SynthesisError("target dimension: agent " + std::to_string(i + 1) +
                           " is outside the supported class (SISO with a "
                           "nonzero transfer function)");
    }
    min_nq = std::max(min_nq, *rep.relative_degree);
  }
  if (cfg.exo_Ar) {
    min_nq = std::max(min_nq, static_cast<int>(cfg.exo_Ar->rows()));
  }
  return min_nq;
}

ProtocolSpec make_spec(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ProtocolKind::kFullState: {
      const LtiSystem& model = cfg.agents.front();
      const Matrix k =
          cfg.gain_k ? *cfg.gain_k : design_state_gain(model.A(), model.B());
      return ProtocolSpec::full_state(model, k);
    }
    case ProtocolKind::kPartialState: {
      const LtiSystem& model = cfg.agents.front();
      if (cfg.gain_k) {
        return ProtocolSpec::partial_state(model, *cfg.gain_k, *cfg.gain_h);
      }
      const GainSet gs = GainSet::design(model);
      return ProtocolSpec::partial_state(model, gs.K(), gs.H());
    }
    case ProtocolKind::kOutputSync: {
      const TargetModel target = default_target(
          cfg.target_nq ? *cfg.target_nq : required_target_dim(cfg));
      if (cfg.gain_k) {
        return ProtocolSpec::output_sync(cfg.agents, target, *cfg.gain_k,
                                         *cfg.gain_h);
      }
      const GainSet gs = GainSet::design(target.system);
      return ProtocolSpec::output_sync(cfg.agents, target, gs.K(), gs.H());
    }
    case ProtocolKind::kRegulatedSync: {
      const int nq = cfg.target_nq ? *cfg.target_nq : required_target_dim(cfg);
      const ExosystemSpec exo = augment_exosystem(*cfg.exo_Cr, *cfg.exo_Ar, nq);
      if (cfg.gain_k) {
        return ProtocolSpec::regulated_sync(cfg.agents, exo, *cfg.gain_k,
                                            *cfg.gain_h);
      }
      const GainSet gs = GainSet::design(exo.augmented);
      return ProtocolSpec::regulated_sync(cfg.agents, exo, gs.K(), gs.H());
    }
  }
  throw ConfigError("build: unknown protocol kind");
}

}  // namespace

BuiltExperiment build(const ExperimentConfig& cfg, bool certify_gains) {
  const bool heterogeneous = cfg.kind == ProtocolKind::kOutputSync ||
                             cfg.kind == ProtocolKind::kRegulatedSync;
  if (cfg.agents.empty()) {
    throw ConfigError("build: no agent model");
  }
  if (!heterogeneous && cfg.agents.size() != 1) {
    throw ConfigError("build: protocols 1 and 2 take exactly one shared model");
  }
  if (heterogeneous &&
      static_cast<int>(cfg.agents.size()) != cfg.graph.size()) {
    throw ConfigError("build: agent count does not match the graph");
  }
  if (cfg.kind == ProtocolKind::kFullState && cfg.gain_h) {
    throw ConfigError("build: protocol 1 uses no observer gain");
  }
  if (cfg.kind != ProtocolKind::kFullState &&
      cfg.gain_k.has_value() != cfg.gain_h.has_value()) {
    throw ConfigError("build: gains K and H come together");
  }
  if (cfg.kind == ProtocolKind::kRegulatedSync && (!cfg.exo_Ar || !cfg.exo_Cr)) {
    throw ConfigError("build: protocol 4 needs an exosystem");
  }

  ProtocolSpec spec = make_spec(cfg);
  if (certify_gains && cfg.gain_k) {
    if (!(spec.rho_control < 1.0 - kUnitDiskTol)) {
      throw SynthesisError("supplied gains: A - BK is not Schur (rho = " +
                           std::to_string(spec.rho_control) + ")");
    }
    if (spec.H.size() > 0 && !(spec.rho_observer < 1.0 - kUnitDiskTol)) {
      throw SynthesisError("supplied gains: A - HC is not Schur (rho = " +
                           std::to_string(spec.rho_observer) + ")");
    }
  }
  return BuiltExperiment{
      SimConfig{std::move(spec), cfg.graph, cfg.rootset, cfg.horizon, cfg.x0,
                cfg.exo_x0, cfg.seed, cfg.allow_unverified},
      cfg.tol, !cfg.gain_k.has_value()};
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

void append_component(std::string& row, const Vector& v, int index0) {
  row.push_back(',');
  if (index0 < v.size()) {
    row += fmt17(v(index0));
  }
}

}  // namespace

std::string trace_csv(const Trace& trace) {
  std::string out = "k,agent,state_index,x,y,u,zeta,ref\n";
  const bool regulated = trace.kind == ProtocolKind::kRegulatedSync;
  const int agents = trace.agent_count();
  for (int k = 0; k <= trace.horizon; ++k) {
    const std::size_t sk = static_cast<std::size_t>(k);
    for (int i = 0; i < agents; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      const Vector& x = trace.x[sk][si];
      const Vector& y = trace.y[sk][si];
      const Vector& u = trace.u[sk][si];
      const Vector& z = trace.zeta[sk][si];
      const auto rows = std::max({x.size(), y.size(), u.size(), z.size()});
      for (Eigen::Index s = 0; s < rows; ++s) {
        std::string row = std::to_string(k) + ',' + std::to_string(i + 1) +
                          ',' + std::to_string(s + 1);
        append_component(row, x, static_cast<int>(s));
        append_component(row, y, static_cast<int>(s));
        append_component(row, u, static_cast<int>(s));
        append_component(row, z, static_cast<int>(s));
        row.push_back(',');
        if (regulated) {
          row += fmt17(trace.y_ref[sk]);
        }
        row.push_back('\n');
        out += row;
      }
    }
  }
  return out;
}

std::string metrics_csv(const Trace& trace) {
  std::string out = "k,disagreement,regulation_error\n";
  const bool regulated = !trace.regulation_error.empty();
  for (std::size_t k = 0; k < trace.disagreement.size(); ++k) {
    out += std::to_string(k);
    out.push_back(',');
    out += fmt17(trace.disagreement[k]);
    out.push_back(',');
    if (regulated) {
      out += fmt17(trace.regulation_error[k]);
    }
    out.push_back('\n');
  }
  return out;
}

std::string plot_script(const Trace& trace) {
  const int agents = trace.agent_count();
  Eigen::Index max_states = 1;
  if (!trace.x.empty()) {
    for (const Vector& v : trace.x.front()) {
      max_states = std::max(max_states, v.size());
    }
  }
  const bool regulated = trace.kind == ProtocolKind::kRegulatedSync;
  std::ostringstream s;
  s << "# Renders the trace.csv / metrics.csv pair written next to this script.\n"
    << "set datafile separator ','\n"
    << "set terminal svg size 960,600\n"
    << "set key outside right\n"
    << "set xlabel 'step k'\n"
    << "\n"
    << "set output 'disagreement.svg'\n"
    << "set ylabel 'max pairwise gap'\n"
    << "set logscale y\n"
    << "plot 'metrics.csv' using 1:($2 > 0 ? $2 : 1/0) with lines lw 2 "
       "title 'disagreement'\n"
    << "\n"
    << "unset logscale y\n"
    << "set output 'states.svg'\n"
    << "set ylabel 'state components'\n"
    << "plot for [a=1:" << agents << "] for [s=1:" << max_states
    << "] 'trace.csv' \\\n"
    << "  using 1:($2 == a && $3 == s ? $4 : 1/0) with lines "
       "title sprintf('agent %d x%d', a, s)\n"
    << "\n"
    << "set output 'outputs.svg'\n"
    << "set ylabel 'y'\n"
    << "plot for [a=1:" << agents << "] 'trace.csv' "
    << "using 1:($2 == a && $3 == 1 ? $5 : 1/0) with lines "
       "title sprintf('agent %d', a)";
  if (regulated) {
    s << ", \\\n  'trace.csv' using 1:($2 == 1 && $3 == 1 ? $8 : 1/0) "
         "with lines dashtype 2 lw 2 title 'reference'\n"
      << "\n"
      << "set output 'regulation.svg'\n"
      << "set ylabel 'max |y - y_r|'\n"
      << "set logscale y\n"
      << "plot 'metrics.csv' using 1:($3 > 0 ? $3 : 1/0) with lines lw 2 "
         "title 'regulation error'\n";
  } else {
    s << "\n";
  }
  return s.str();
}

namespace {

void metric_lines(std::ostringstream& s, const char* prefix,
                  const std::vector<double>& series, double tol) {
  const Metrics m = compute_metrics(series, tol);
  s << prefix << "_initial = " << fmt17(m.initial) << "\n";
  s << prefix << "_final = " << fmt17(m.final_value) << "\n";
  s << prefix << "_settled_step = " << m.settled_step << "\n";
  s << prefix << "_decay_rate = " << fmt17(m.decay_rate) << "\n";
  if (m.identically_zero) {
    s << prefix << "_identically_zero = yes\n";
  }
}

}  // namespace

std::string summary_text(const BuiltExperiment& built, const SyncCertificate& cert,
                         const Trace* trace,
                         std::optional<double> oracle_deviation) {
  const ProtocolSpec& spec = built.sim.protocol;
  std::ostringstream s;
  s << "protocol = " << protocol_index(spec.kind) << "\n";
  s << "nodes = " << built.sim.graph.size() << "\n";
  s << "model_dim = " << spec.model_dim() << "\n";
  s << "horizon = " << built.sim.horizon << "\n";
  s << "seed = " << built.sim.seed << "\n";
  s << "gains = " << (built.gains_designed ? "designed" : "supplied") << "\n";
  s << "rho_control = " << fmt17(spec.rho_control) << "\n";
  if (spec.H.size() > 0) {
    s << "rho_observer = " << fmt17(spec.rho_observer) << "\n";
  }
  s << "structural_ok = " << (cert.structural_ok ? "yes" : "no") << "\n";
  if (!cert.structural_ok) {
    s << "refusal = " << cert.refusal_reason << "\n";
  } else {
    s << "certified = " << (cert.certified ? "yes" : "no") << "\n";
    s << "spectral_radius = " << fmt17(cert.spectral_radius) << "\n";
    for (const auto& [name, rho] : cert.block_radii) {
      s << "rho[" << name << "] = " << fmt17(rho) << "\n";
    }
  }
  if (oracle_deviation) {
    s << "oracle_deviation = " << fmt17(*oracle_deviation) << "\n";
    s << "oracle_ok = "
      << (*oracle_deviation < kOracleDeviationTol ? "yes" : "no") << "\n";
  }
  if (trace) {
    metric_lines(s, "disagreement", trace->disagreement, built.tol);
    if (!trace->regulation_error.empty()) {
      metric_lines(s, "regulation_error", trace->regulation_error, built.tol);
    }
  }
  return s.str();
}

std::string gains_json(const ProtocolSpec& spec) {
  json doc;
  doc["K"] = detail::matrix_to_json(spec.K);
  doc["rho_control"] = spec.rho_control;
  if (spec.H.size() > 0) {
    doc["H"] = detail::matrix_to_json(spec.H);
    doc["rho_observer"] = spec.rho_observer;
  }
  return doc.dump(2) + "\n";
}

std::string compensator_json(const Compensator& comp) {
  json doc;
  doc["Ah"] = detail::matrix_to_json(comp.Ah);
  doc["Bh"] = detail::matrix_to_json(comp.Bh);
  doc["Ch"] = detail::matrix_to_json(comp.Ch);
  doc["Dh"] = detail::matrix_to_json(comp.Dh);
  doc["Eh"] = detail::matrix_to_json(comp.Eh);
  doc["As"] = detail::matrix_to_json(comp.As);
  doc["Cs"] = detail::matrix_to_json(comp.Cs);
  doc["rho_As"] = comp.rho_As;
  doc["target_from_plant"] = detail::matrix_to_json(comp.target_from_plant);
  doc["target_from_comp"] = detail::matrix_to_json(comp.target_from_comp);
  doc["resid_from_plant"] = detail::matrix_to_json(comp.resid_from_plant);
  doc["resid_from_comp"] = detail::matrix_to_json(comp.resid_from_comp);
  return doc.dump(2) + "\n";
}

std::string exosystem_json(const ExosystemSpec& exo) {
  json doc;
  doc["Ar"] = detail::matrix_to_json(exo.Ar);
  doc["Cr"] = detail::matrix_to_json(exo.Cr);
  doc["Ar_check"] = detail::matrix_to_json(exo.augmented.A());
  doc["Br_check"] = detail::matrix_to_json(exo.augmented.B());
  doc["Cr_check"] = detail::matrix_to_json(exo.augmented.C());
  doc["lift"] = detail::matrix_to_json(exo.lift);
  doc["nq"] = exo.nq;
  return doc.dump(2) + "\n";
}

LtiSystem reference_example_model() {
  Matrix a(3, 3);
  a << 0.5, 1.0, 1.0,
       0.0, 0.866, -0.5,
       0.0, 0.5, 0.866;
  Matrix b(3, 1);
  b << 0.0, 0.0, 1.0;
  Matrix c(1, 3);
  c << 1.0, 0.0, 0.0;
  return LtiSystem(std::move(a), std::move(b), std::move(c));
}

Matrix reference_example_k() {
  Matrix k(1, 3);
  k << 0.0695, 1.7625, 1.2051;
  return k;
}

Matrix reference_example_h() {
  Matrix h(3, 1);
  h << 1.4327, 0.4143, 0.6993;
  return h;
}

WeightedDigraph bundled_graph(int which) {
  struct Edge {
    int from, to;
    double weight;
  };
  int n = 0;
  std::vector<Edge> edges;
  switch (which) {
    case 1:  // 4-node directed ring with one chord
      n = 4;
      edges = {{1, 2, 1.0}, {2, 3, 0.8}, {3, 4, 1.2}, {4, 1, 0.6}, {1, 3, 0.5}};
      break;
    case 2:  // 6-node tree with one feedback edge
      n = 6;
      edges = {{1, 2, 1.0}, {1, 3, 0.7}, {2, 4, 0.9},
               {3, 5, 1.1}, {5, 6, 0.8}, {6, 1, 0.4}};
      break;
    case 3:  // 3-node unit cycle
      n = 3;
      edges = {{1, 2, 1.0}, {2, 3, 1.0}, {3, 1, 1.0}};
      break;
    default:
      throw ConfigError("bundled_graph: index must be 1, 2 or 3");
  }
  Matrix w = Matrix::Zero(n, n);
  for (const Edge& e : edges) {
    w(e.to - 1, e.from - 1) = e.weight;
  }
  return WeightedDigraph(std::move(w));
}

std::vector<LtiSystem> bundled_heterogeneous_agents() {
  std::vector<LtiSystem> agents;
  {
    Matrix a(1, 1), b(1, 1), c(1, 1);
    a << 0.5;
    b << 1.0;
    c << 1.0;
    agents.emplace_back(a, b, c, c);
  }
  {
    Matrix a(2, 2), b(2, 1), c(1, 2);
    a << 0.0, 1.0,
         0.0, 0.5;
    b << 0.0, 1.0;
    c << -0.2, 1.0;  // invariant zero at 0.2, relative degree 1
    agents.emplace_back(a, b, c, c);
  }
  {
    Matrix a(2, 2), b(2, 1), c(1, 2);
    a << 0.0, 1.0,
         0.0, 0.3;
    b << 0.0, 1.0;
    c << 1.0, 0.0;  // relative degree 2, no zeros
    agents.emplace_back(a, b, c, c);
  }
  return agents;
}

int cmd_design(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const BuiltExperiment built = build(cfg, /*certify_gains=*/true);
  const ProtocolSpec& spec = built.sim.protocol;
  write_text_file(out_dir / "gains.json", gains_json(spec));

  std::ostringstream rep;
  rep << "design report\n";
  rep << "protocol = " << protocol_index(spec.kind) << "\n";
  rep << "model_dim = " << spec.model_dim() << "\n";
  rep << "gains = "
      << (built.gains_designed ? "designed" : "supplied, certified") << "\n";
  rep << "rho_control = " << fmt17(spec.rho_control) << "\n";
  if (spec.H.size() > 0) {
    rep << "rho_observer = " << fmt17(spec.rho_observer) << "\n";
  }
  for (std::size_t i = 0; i < spec.compensators.size(); ++i) {
    const Compensator& comp = spec.compensators[i];
    const std::string name = "compensator_" + std::to_string(i + 1) + ".json";
    write_text_file(out_dir / name, compensator_json(comp));
    rep << "agent " << i + 1 << ": xi_dim = " << comp.xi_dim()
        << ", resid_dim = " << comp.resid_dim()
        << ", rho_As = " << fmt17(comp.rho_As) << "\n";
  }
  if (spec.exosystem) {
    write_text_file(out_dir / "exosystem.json", exosystem_json(*spec.exosystem));
    rep << "exosystem nq = " << spec.exosystem->nq << "\n";
  }
  write_text_file(out_dir / "report.txt", rep.str());
  return 0;
}

int cmd_simulate(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const BuiltExperiment built = build(cfg, /*certify_gains=*/false);
  const SyncCertificate cert = certify_synchronization(built.sim);
  const Trace trace = run(built.sim);
  write_text_file(out_dir / "trace.csv", trace_csv(trace));
  write_text_file(out_dir / "metrics.csv", metrics_csv(trace));
  write_text_file(out_dir / "summary.txt",
                  summary_text(built, cert, &trace, std::nullopt));
  write_text_file(out_dir / "plot.gp", plot_script(trace));
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const BuiltExperiment built = build(cfg, /*certify_gains=*/false);
  const SyncCertificate cert = certify_synchronization(built.sim);
  const fs::path cert_path = out_dir / "certificate.txt";
  if (!cert.structural_ok) {
    write_text_file(cert_path, summary_text(built, cert, nullptr, std::nullopt));
    return 3;
  }
  if (!cert.certified) {
    write_text_file(cert_path, summary_text(built, cert, nullptr, std::nullopt));
    return 2;
  }
  const double deviation = oracle_compare(built.sim, built.sim.horizon);
  write_text_file(cert_path, summary_text(built, cert, nullptr, deviation));
  return deviation < kOracleDeviationTol ? 0 : 4;
}

namespace {

std::string one_row_matrix(const Matrix& m) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (i > 0) {
      out += ", ";
    }
    out += fmt17(m(i));
  }
  return out + "]";
}

}  // namespace

int cmd_paper_example(const fs::path& out_dir, int horizon) {
  if (horizon <= 0) {
    horizon = 300;
  }
  const LtiSystem model = reference_example_model();
  const Matrix k_ref = reference_example_k();
  const Matrix h_ref = reference_example_h();

  std::ostringstream rep;
  rep << "reference example report\n";
  rep << "\n[agent]\n";
  const ComplexVector eig_a = eigenvalues(model.A());
  rep << "n = " << model.n()
      << ", max |eig(A)| = " << fmt17(eig_a.cwiseAbs().maxCoeff()) << "\n";

  rep << "\n[shipped gains]\n";
  const ProtocolSpec shipped = ProtocolSpec::partial_state(model, k_ref, h_ref);
  rep << "K = " << one_row_matrix(k_ref) << "\n";
  rep << "H = " << one_row_matrix(h_ref.transpose()) << " (column)\n";
  rep << "rho(A - BK) = " << fmt17(shipped.rho_control) << "\n";
  rep << "rho(A - HC) = " << fmt17(shipped.rho_observer) << "\n";
  const bool control_ok = shipped.rho_control < 1.0 - kUnitDiskTol;
  const bool observer_ok = shipped.rho_observer < 1.0 - kUnitDiskTol;
  rep << "certification = " << (control_ok && observer_ok ? "PASS" : "FAIL")
      << "\n";
  if (!control_ok) {
    rep << "note: A - BK is not Schur, so the shipped state-feedback gain "
           "does not stabilize this agent; every shipped-gain run below is "
           "expected to diverge\n";
  }
  if (!observer_ok) {
    rep << "note: A - HC is not Schur\n";
  }

  rep << "\n[designed gains]\n";
  const GainSet designed = GainSet::design(model);
  const ProtocolSpec designed_spec =
      ProtocolSpec::partial_state(model, designed.K(), designed.H());
  rep << "rho(A - BK) = " << fmt17(designed_spec.rho_control) << "\n";
  rep << "rho(A - HC) = " << fmt17(designed_spec.rho_observer) << "\n";
  for (int i = 1; i <= 3; ++i) {
    const WeightedDigraph graph = bundled_graph(i);
    const BuiltExperiment built{
        SimConfig{designed_spec, graph, {}, horizon, std::nullopt, std::nullopt,
                  static_cast<std::uint64_t>(i), false},
        1e-8, true};
    const SyncCertificate cert = certify_synchronization(built.sim);
    const Trace trace = run(built.sim);
    const double deviation = oracle_compare(assemble(built.sim), trace);
    const fs::path case_dir = out_dir / ("case" + std::to_string(i));
    write_text_file(case_dir / "trace.csv", trace_csv(trace));
    write_text_file(case_dir / "metrics.csv", metrics_csv(trace));
    write_text_file(case_dir / "summary.txt",
                    summary_text(built, cert, &trace, deviation));
    write_text_file(case_dir / "plot.gp", plot_script(trace));
    const Metrics m = metrics(trace, 1e-8);
    rep << "case " << i << ": nodes = " << graph.size() << ", certified = "
        << (cert.certified ? "yes" : "no")
        << ", spectral_radius = " << fmt17(cert.spectral_radius)
        << ", disagreement " << fmt17(m.initial) << " -> " << fmt17(m.final_value)
        << ", oracle_deviation = " << fmt17(deviation) << "\n";
  }

  rep << "\n[shipped gains on the bundled cases]\n";
  const int short_horizon = std::min(horizon, 200);
  for (int i = 1; i <= 3; ++i) {
    const WeightedDigraph graph = bundled_graph(i);
    const SyncCertificate cert = certify_synchronization(shipped, graph);
    rep << "case " << i << ": certified = " << (cert.certified ? "yes" : "no");
    for (const auto& [name, rho] : cert.block_radii) {
      rep << ", rho[" << name << "] = " << fmt17(rho);
    }
    rep << "\n";
    const SimConfig sc{shipped, graph, {}, short_horizon, std::nullopt,
                       std::nullopt, static_cast<std::uint64_t>(i), false};
    try {
      const Trace trace = run(sc);
      const Metrics m = metrics(trace, 1e-8);
      rep << "  run completed: disagreement " << fmt17(m.initial) << " -> "
          << fmt17(m.final_value) << " over " << short_horizon << " steps\n";
    } catch (const DivergedError& e) {
      rep << "  " << e.what() << "\n";
    }
  }

  write_text_file(out_dir / "report.txt", rep.str());
  return control_ok && observer_ok ? 0 : 2;
}

int cmd_batch(const std::vector<fs::path>& config_paths, const fs::path& out_dir) {
  if (config_paths.empty()) {
    throw ConfigError("batch: no config files given");
  }
  int worst = 0;
  std::ostringstream sum;
  for (const fs::path& path : config_paths) {
    const std::string stem = path.stem().string();
    int code = 0;
    std::string note = "ok";
    try {
      const ExperimentConfig cfg = load_experiment_file(path);
      code = cmd_simulate(cfg, out_dir / stem);
    } catch (const std::exception& e) {
      code = exit_code_for_error(e);
      note = e.what();
    }
    sum << stem << ": exit " << code << " (" << note << ")\n";
    worst = std::max(worst, code);
  }
  write_text_file(out_dir / "batch_summary.txt", sum.str());
  return worst;
}

int exit_code_for_error(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error) != nullptr ||
      dynamic_cast<const DimensionError*>(&error) != nullptr) {
    return 1;
  }
  if (dynamic_cast<const SynthesisError*>(&error) != nullptr ||
      dynamic_cast<const DivergedError*>(&error) != nullptr) {
    return 2;
  }
  if (dynamic_cast<const StructuralError*>(&error) != nullptr) {
    return 3;
  }
  return 4;  // ConsistencyError, NumericalError, anything unexpected
}

}  // namespace scalefree
