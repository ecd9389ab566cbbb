#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scalefree/lti.hpp"
#include "scalefree/netgraph.hpp"
#include "scalefree/protocols.hpp"
#include "scalefree/sim.hpp"
#include "scalefree/synthesis.hpp"
#include "scalefree/verify.hpp"

namespace scalefree {

/// Oracle deviations at or above this are treated as an engine defect by
/// the verify command, not a property of the design.
inline constexpr double kOracleDeviationTol = 1e-9;

/// A fully validated experiment file, pre-synthesis. Kinds 1 and 2 carry
/// exactly one entry in `agents` (the shared model); kinds 3 and 4 carry one
/// per node. Gains are optional: absent means "design here".
struct ExperimentConfig {
  ProtocolKind kind = ProtocolKind::kFullState;
  WeightedDigraph graph;
  std::vector<int> rootset;  // kind 4, 0-based
  std::vector<LtiSystem> agents;
  std::optional<Matrix> gain_k;
  std::optional<Matrix> gain_h;
  std::optional<int> target_nq;  // kinds 3-4: homogenized model dimension
  std::optional<Matrix> exo_Ar;  // kind 4
  std::optional<Matrix> exo_Cr;
  int horizon = 100;
  std::uint64_t seed = 0;
  double tol = 1e-8;  // settled-step threshold for reported metrics
  std::optional<std::vector<Vector>> x0;
  std::optional<Vector> exo_x0;
  bool allow_unverified = false;
};

/// Parses and validates an experiment config. Unknown keys anywhere are
/// rejected; keys inconsistent with the protocol kind are rejected; file
/// references (graph_file, agent_files) resolve relative to base_dir.
ExperimentConfig parse_experiment(const std::string& text,
                                  const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_file(const std::filesystem::path& path);

/// Whole-file text IO. Reading a missing file or writing to an unwritable
/// path raises ConfigError.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Synthesized, ready-to-run experiment. The protocol spec (gains,
/// compensators, exosystem) lives inside `sim.protocol`.
struct BuiltExperiment {
  SimConfig sim;
  double tol = 1e-8;
  bool gains_designed = false;  // false when the config supplied K (and H)
};

/// Completes the config into a runnable experiment. With certify_gains,
/// supplied gains must pass the Schur certificates (SynthesisError
/// otherwise), matching the design command's contract; without it they are
/// recorded as given and only the simulator's guards apply.
BuiltExperiment build(const ExperimentConfig& cfg, bool certify_gains);

/// CSV with header k,agent,state_index,x,y,u,zeta,ref; one row per step,
/// agent and component index (1-based). Components a column does not have
/// at that index are left empty; ref carries y_r on every row of a
/// regulated trace. Numbers print with %.17g and round-trip bit-exactly.
std::string trace_csv(const Trace& trace);

/// CSV with header k,disagreement,regulation_error; the last column is
/// empty for non-regulated traces.
std::string metrics_csv(const Trace& trace);

/// gnuplot script rendering disagreement.svg, states.svg and outputs.svg
/// (plus regulation.svg for regulated traces) from trace.csv/metrics.csv
/// in the same directory.
std::string plot_script(const Trace& trace);

/// key = value lines: design provenance, certificate with per-block
/// spectral radii, run metrics. Also the serialization format of the
/// verify command's certificate file.
std::string summary_text(const BuiltExperiment& built, const SyncCertificate& cert,
                         const Trace* trace,
                         std::optional<double> oracle_deviation);

/// Synthesis artifacts as JSON documents.
std::string gains_json(const ProtocolSpec& spec);
std::string compensator_json(const Compensator& comp);
std::string exosystem_json(const ExosystemSpec& exo);

/// The bundled third-order reference agent and the gain pair shipped with
/// it, reproduced digit for digit. The paper-example command reports the
/// measured closed-loop radii of this pair; whether they pass is decided by
/// the numbers, never assumed.
LtiSystem reference_example_model();
Matrix reference_example_k();
Matrix reference_example_h();

/// Three spanning-tree digraphs (N = 4, 6, 3) used by the bundled cases;
/// `which` is 1-based. Identical to the graphs inside cases/case<i>.json.
WeightedDigraph bundled_graph(int which);

/// Three minimum-phase SISO agents (orders 1, 2, 2) with Cm = C, used by
/// the bundled heterogeneous cases.
std::vector<LtiSystem> bundled_heterogeneous_agents();

/// Commands behind the CLI, returning process exit codes on their own
/// error-free paths; thrown errors are mapped by exit_code_for_error in
/// the caller. Batch is the exception: it isolates per-config failures and
/// returns the worst code.
int cmd_design(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
int cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
int cmd_verify(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
int cmd_paper_example(const std::filesystem::path& out_dir, int horizon = 300);
int cmd_batch(const std::vector<std::filesystem::path>& config_paths,
              const std::filesystem::path& out_dir);

/// Exit-code contract: 1 usage/config, 2 synthesis or divergence, 3
/// structural refusal, 4 internal-consistency or numerical defect.
int exit_code_for_error(const std::exception& error);

}  // namespace scalefree
