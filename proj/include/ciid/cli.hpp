#pragma once

#include "ciid/gmm.hpp"
#include "ciid/harness.hpp"

#include <iosfwd>
#include <string>

namespace ciid {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes, shared by every subcommand:
//   0 success, 2 flag/config error, 3 data error, 4 verification failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitVerify = 4;

struct GmmVerifyOptions {
    // Shipped defaults: a visibly separated 80/20 mixture at n = 200.
    GmmParams params{0.0, 1.0, 1.0, 1.0, 160, 40};
    McConfig mc;
    double abs_tol = 1e-3;
    double se_mult = 4.0;
    std::string out_path;  // empty writes the CSV to stdout
};

int cmd_gmm_verify(const GmmVerifyOptions& options, std::ostream& out, std::ostream& err);

// Parsed experiment config file: dataset source plus everything
// run_experiment needs. The schema is resolved (synthetic sources carry the
// generator's implied schema).
struct ExperimentFile {
    enum class Source { Csv, Synthetic };
    Source source = Source::Csv;
    std::string csv_path;
    SynthParams synth;
    DatasetSchema schema;
    ExperimentConfig experiment;
    std::string echo;  // normalized JSON echo for the report bundle
};

ExperimentFile load_experiment_file(const std::string& path);
DatasetSchema load_schema_file(const std::string& path);
LabeledDataset load_experiment_dataset(const ExperimentFile& file);

struct RunOptions {
    std::string config_path;
    std::string out_dir;
};

// Writes report.json, metrics.csv, composition.csv, and one SVG per metric
// into out_dir.
int cmd_run(const RunOptions& options, std::ostream& log, std::ostream& err);

int cmd_compose(const std::string& dataset_path, const std::string& schema_path, std::ostream& out,
                std::ostream& err);

struct SynthOptions {
    SynthParams params;
    std::string out_path;  // empty writes the CSV to stdout
};

int cmd_synth(const SynthOptions& options, std::ostream& out, std::ostream& err);

}  // namespace ciid
