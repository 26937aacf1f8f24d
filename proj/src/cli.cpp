#include "ciid/cli.hpp"

#include "ciid/svg.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ciid {

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("parse error in " + path + ": " + e.what());
    }
}

DatasetSchema schema_from_json(const json& j, const std::string& where) {
    try {
        DatasetSchema schema;
        schema.target.column = j.at("target").at("column").get<std::string>();
        schema.target.positive_value = j.at("target").at("positive").get<std::string>();
        for (const auto& p : j.at("protected"))
            schema.protected_columns.push_back({p.at("column").get<std::string>(),
                                                p.at("privileged").get<std::string>()});
        for (const auto& c : j.at("columns")) {
            const std::string kind = c.at("kind").get<std::string>();
            if (kind != "numeric" && kind != "categorical")
                throw ConfigError("schema column kind must be numeric or categorical: " + kind);
            schema.columns.push_back({c.at("name").get<std::string>(),
                                      kind == "numeric" ? ColumnKind::Numeric
                                                        : ColumnKind::Categorical});
        }
        schema.validate();
        return schema;
    } catch (const json::exception& e) {
        throw ConfigError("invalid schema in " + where + ": " + e.what());
    }
}

LearnerConfig learner_from_json(const json& j, const std::string& where) {
    try {
        LearnerConfig cfg;
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "logistic_regression") {
            cfg.kind = LearnerKind::LogisticRegression;
            cfg.logreg.learning_rate = j.value("learning_rate", cfg.logreg.learning_rate);
            cfg.logreg.iterations = j.value("iterations", cfg.logreg.iterations);
            cfg.logreg.l2 = j.value("l2", cfg.logreg.l2);
        } else if (kind == "decision_tree") {
            cfg.kind = LearnerKind::DecisionTree;
            cfg.tree.max_depth = j.value("max_depth", cfg.tree.max_depth);
            cfg.tree.min_samples_leaf = j.value("min_samples_leaf", cfg.tree.min_samples_leaf);
        } else if (kind == "k_neighbors") {
            cfg.kind = LearnerKind::KNeighbors;
            cfg.knn.k = j.value("k", cfg.knn.k);
        } else {
            throw ConfigError("unknown learner kind: " + kind);
        }
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError("invalid learner in " + where + ": " + e.what());
    }
}

SynthParams synth_from_json(const json& j) {
    SynthParams params;
    params.n_priv = j.value("n_priv", params.n_priv);
    params.n_dis = j.value("n_dis", params.n_dis);
    params.dims = j.value("dims", params.dims);
    params.boundary_shift = j.value("boundary_shift", params.boundary_shift);
    params.sigma_priv = j.value("sigma_priv", params.sigma_priv);
    params.sigma_dis = j.value("sigma_dis", params.sigma_dis);
    params.seed = j.value("seed", params.seed);
    params.validate();
    return params;
}

std::string write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path.string());
    out << content;
    return path.string();
}

std::string format_fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

int cmd_gmm_verify(const GmmVerifyOptions& options, std::ostream& out, std::ostream& err) {
    VerificationReport report;
    try {
        options.params.validate();
        options.mc.validate();
        report = verify_table(options.params, options.mc, options.abs_tol, options.se_mult);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    const std::string csv = report.to_csv();
    if (options.out_path.empty()) {
        out << csv;
    } else {
        try {
            write_text_file(options.out_path, csv);
        } catch (const ConfigError& e) {
            err << "data error: " << e.what() << "\n";
            return kExitData;
        }
    }
    std::size_t failed = 0;
    for (const auto& row : report.rows) failed += row.pass ? 0 : 1;
    err << (report.all_pass() ? "gmm-verify: all " : "gmm-verify: FAILED ")
        << (report.all_pass() ? std::to_string(report.rows.size()) + " cells pass"
                              : std::to_string(failed) + " of " + std::to_string(report.rows.size()) +
                                    " cells")
        << "\n";
    return report.all_pass() ? kExitOk : kExitVerify;
}

ExperimentFile load_experiment_file(const std::string& path) {
    const json j = read_json_file(path);
    ExperimentFile file;
    try {
        const json& ds = j.at("dataset");
        const std::string type = ds.at("type").get<std::string>();
        if (type == "csv") {
            file.source = ExperimentFile::Source::Csv;
            file.csv_path = ds.at("path").get<std::string>();
            file.schema = schema_from_json(j.at("schema"), path);
        } else if (type == "synthetic") {
            file.source = ExperimentFile::Source::Synthetic;
            file.synth = synth_from_json(ds);
            file.schema = synth_schema(file.synth.dims);
        } else {
            throw ConfigError("dataset.type must be csv or synthetic: " + type);
        }

        for (const auto& spec : j.at("specs")) {
            std::vector<std::string> columns;
            for (const auto& col : spec) columns.push_back(col.get<std::string>());
            file.experiment.specs.push_back(make_group_spec(file.schema, columns));
        }
        if (j.contains("cluster_counts"))
            for (const auto& k : j.at("cluster_counts"))
                file.experiment.cluster_counts.push_back(k.get<int>());

        if (j.contains("learner_grid")) {
            for (const auto& learner : j.at("learner_grid"))
                file.experiment.learner_grid.push_back(learner_from_json(learner, path));
        } else {
            file.experiment.learner_grid.push_back(learner_from_json(j.at("learner"), path));
        }

        file.experiment.runs = j.value("runs", 18);
        file.experiment.base_seed = j.value("seed", std::uint64_t{1});
        if (j.contains("split")) {
            const json& s = j.at("split");
            file.experiment.split_ratios.train = s.value("train", 80);
            file.experiment.split_ratios.test = s.value("test", 10);
            file.experiment.split_ratios.validation = s.value("validation", 10);
        }
        file.experiment.validate();
    } catch (const json::exception& e) {
        throw ConfigError("invalid experiment config " + path + ": " + e.what());
    }
    file.echo = j.dump(2);
    return file;
}

DatasetSchema load_schema_file(const std::string& path) {
    return schema_from_json(read_json_file(path), path);
}

LabeledDataset load_experiment_dataset(const ExperimentFile& file) {
    if (file.source == ExperimentFile::Source::Csv) return load_csv(file.csv_path, file.schema);
    return synth_ciid(file.synth).data;
}

namespace {

std::string metrics_csv(const GroupedMetricsReport& report) {
    std::ostringstream os;
    os << "run,model,subgroup,metric,value\n";
    for (const auto& r : report.records) {
        os << r.run << ',' << csv_quote(r.model) << ',' << csv_quote(r.subgroup) << ','
           << r.metric << ',' << (r.value ? format_double(*r.value) : "NA") << '\n';
    }
    return os.str();
}

std::string composition_csv(const CompositionTable& table) {
    std::ostringstream os;
    os << "subgroup,proportion\n";
    for (const auto& [name, value] : table.rows)
        os << csv_quote(name) << ',' << format_double(value) << '\n';
    return os.str();
}

json report_json(const ExperimentFile& file, const ExperimentResult& result,
                 const CompositionTable& composition, std::int64_t rows,
                 std::int64_t rows_dropped) {
    json j;
    j["tool_version"] = kToolVersion;
    j["config"] = json::parse(file.echo);
    j["dataset"]["rows"] = rows;
    j["dataset"]["rows_dropped_missing_target"] = rows_dropped;
    j["seeds"]["base_seed"] = file.experiment.base_seed;
    j["tuned_learner"] = result.tuned_learner.describe();
    j["models"] = result.scheme_names;
    j["subgroups"] = result.report.subgroups;
    j["metrics"] = result.report.metrics;
    j["runs"] = result.report.runs;
    for (std::size_t r = 0; r < result.test_fingerprints.size(); ++r)
        j["test_split_fingerprints"].push_back(result.test_fingerprints[r]);
    for (const auto& [name, value] : composition.rows) j["composition"][name] = value;
    for (const auto& row : result.report.aggregate()) {
        json cell;
        cell["model"] = row.model;
        cell["subgroup"] = row.subgroup;
        cell["metric"] = row.metric;
        cell["mean"] = row.cell.mean;
        cell["std"] = row.cell.stddev;
        cell["defined_runs"] = row.cell.defined_runs;
        cell["runs"] = row.cell.total_runs;
        j["aggregates"].push_back(std::move(cell));
    }
    return j;
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& log, std::ostream& err) {
    ExperimentFile file;
    try {
        file = load_experiment_file(options.config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    LabeledDataset full;
    try {
        full = load_experiment_dataset(file);
    } catch (const std::runtime_error& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    }

    try {
        const CompositionTable composition =
            demographic_composition(full, file.experiment.specs);
        const ExperimentResult result = run_experiment(full, file.experiment);

        const std::filesystem::path out_dir(options.out_dir);
        std::filesystem::create_directories(out_dir);
        write_text_file(out_dir / "metrics.csv", metrics_csv(result.report));
        write_text_file(out_dir / "composition.csv", composition_csv(composition));
        write_text_file(out_dir / "report.json",
                        report_json(file, result, composition, full.rows(),
                                    full.rows_dropped_missing_target)
                                .dump(2) +
                            "\n");
        for (const auto& metric : result.report.metrics)
            write_text_file(out_dir / (metric + ".svg"),
                            render_metric_chart(result.report, metric));

        log << "wrote " << (result.report.metrics.size() + 3) << " artifacts to "
            << out_dir.string() << " (" << result.scheme_names.size() << " models, "
            << result.report.runs << " runs)\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::runtime_error& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    }
}

int cmd_compose(const std::string& dataset_path, const std::string& schema_path, std::ostream& out,
                std::ostream& err) {
    DatasetSchema schema;
    try {
        schema = load_schema_file(schema_path);
    } catch (const std::runtime_error& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const LabeledDataset data = load_csv(dataset_path, schema);
        std::vector<GroupSpec> specs;
        std::vector<std::string> all_columns;
        for (const auto& p : schema.protected_columns) all_columns.push_back(p.column);
        if (all_columns.size() > 1) specs.push_back(make_group_spec(schema, all_columns));
        for (const auto& column : all_columns)
            specs.push_back(make_group_spec(schema, {column}));
        const CompositionTable table = demographic_composition(data, specs);
        for (const auto& [name, value] : table.rows)
            out << name << " " << format_fixed3(value) << "\n";
        return kExitOk;
    } catch (const std::runtime_error& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    }
}

int cmd_synth(const SynthOptions& options, std::ostream& out, std::ostream& err) {
    try {
        options.params.validate();
        const SynthDataset synth = synth_ciid(options.params);
        const std::string csv = synth_csv(synth);
        if (options.out_path.empty()) {
            out << csv;
        } else {
            write_text_file(options.out_path, csv);
            out << "wrote " << synth.data.rows() << " rows to " << options.out_path << "\n";
        }
        err << "bayes_accuracy_priv=" << format_double(synth.bayes_priv)
            << " bayes_accuracy_dis=" << format_double(synth.bayes_dis) << "\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::runtime_error& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace ciid
