#include "elsaa/config.hpp"

#include "elsaa/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace elsaa {

namespace {

using nlohmann::json;

const std::set<std::string> kProblemKeys{"problem", "alpha", "r_b", "dimension", "mean", "cov"};
const std::set<std::string> kExperimentKeys{"experiment",   "sample_sizes", "replications", "beta",
                                            "seed",         "methods",      "oracle",       "oracle_draws",
                                            "solution",     "jobs",         "restarts",     "max_cut_iterations"};

json parse_object(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("not valid JSON: ") + e.what()});
    }
    if (!doc.is_object()) throw ConfigError({"top level must be a JSON object"});
    return doc;
}

// Reads doc[key] into out when present; records a message when the type is wrong.
template <class T>
void read(const json& doc, const std::string& key, T& out, std::vector<std::string>& errors, const char* expected) {
    if (!doc.contains(key)) return;
    try {
        out = doc.at(key).get<T>();
    } catch (const json::exception&) {
        errors.push_back("key '" + key + "' must be " + expected);
    }
}

ProblemSpec problem_from(const json& doc, std::vector<std::string>& errors) {
    ProblemKind kind = ProblemKind::quadratic;
    if (doc.contains("problem")) {
        std::string name;
        read(doc, "problem", name, errors, "a string");
        try {
            if (!name.empty()) kind = problem_kind_from_string(name);
        } catch (const std::invalid_argument& e) {
            errors.push_back(e.what());
        }
    } else {
        errors.push_back("missing key 'problem'");
    }
    ProblemSpec spec = default_problem_spec(kind);
    read(doc, "alpha", spec.alpha, errors, "a number");
    read(doc, "r_b", spec.r_b, errors, "a number");
    read(doc, "dimension", spec.dimension, errors, "a positive integer");
    read(doc, "mean", spec.mean, errors, "an array of numbers");
    if (doc.contains("dimension") && !doc.contains("mean") && spec.mean.size() != spec.dimension) {
        spec.mean.assign(spec.dimension, 0.0);
    }
    if (doc.contains("cov")) {
        const json& c = doc.at("cov");
        std::vector<double> flat;
        bool ok = c.is_array();
        if (ok) {
            for (const auto& entry : c) {
                if (entry.is_number()) {
                    flat.push_back(entry.get<double>());
                } else if (entry.is_array()) {
                    for (const auto& v : entry) {
                        if (!v.is_number()) {
                            ok = false;
                            break;
                        }
                        flat.push_back(v.get<double>());
                    }
                } else {
                    ok = false;
                }
            }
        }
        if (ok) {
            spec.cov = std::move(flat);
        } else {
            errors.push_back("key 'cov' must be an array of numbers or of number rows");
        }
    } else if (doc.contains("dimension") && spec.cov.size() != spec.dimension * spec.dimension) {
        spec.cov.assign(spec.dimension * spec.dimension, 0.0);
        for (std::size_t i = 0; i < spec.dimension; ++i) spec.cov[i * spec.dimension + i] = 1.0;
    }
    return spec;
}

void check_unknown(const json& doc, const std::set<std::string>& a, const std::set<std::string>& b,
                   std::vector<std::string>& errors) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!a.count(it.key()) && !b.count(it.key())) errors.push_back("unknown key '" + it.key() + "'");
    }
}

} // namespace

ProblemSpec parse_problem_spec(const std::string& json_text) {
    const json doc = parse_object(json_text);
    std::vector<std::string> errors;
    check_unknown(doc, kProblemKeys, {}, errors);
    ProblemSpec spec = problem_from(doc, errors);
    if (errors.empty()) {
        for (auto& e : problem_spec_errors(spec)) errors.push_back(std::move(e));
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return spec;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    const json doc = parse_object(json_text);
    std::vector<std::string> errors;
    check_unknown(doc, kProblemKeys, kExperimentKeys, errors);
    const ProblemSpec spec = problem_from(doc, errors);

    ExperimentKind kind = ExperimentKind::value;
    if (doc.contains("experiment")) {
        std::string name;
        read(doc, "experiment", name, errors, "a string");
        if (name == "gap") {
            kind = ExperimentKind::gap;
        } else if (name != "value" && !name.empty()) {
            errors.push_back("key 'experiment' must be 'value' or 'gap'");
        }
    }
    ExperimentConfig cfg = default_experiment_config(spec.kind, kind);
    cfg.problem = spec;
    read(doc, "sample_sizes", cfg.sample_sizes, errors, "an array of positive integers");
    read(doc, "replications", cfg.replications, errors, "an integer");
    read(doc, "beta", cfg.beta, errors, "a number");
    read(doc, "seed", cfg.seed, errors, "a nonnegative integer");
    if (doc.contains("methods")) {
        std::vector<std::string> names;
        read(doc, "methods", names, errors, "an array of strings");
        cfg.methods.clear();
        for (const auto& name : names) {
            try {
                cfg.methods.push_back(ci_method_from_string(name));
            } catch (const std::invalid_argument& e) {
                errors.push_back(e.what());
            }
        }
    }
    if (doc.contains("oracle")) {
        std::string name;
        read(doc, "oracle", name, errors, "a string");
        if (name == "analytic") {
            cfg.oracle = OracleMode::analytic;
        } else if (name == "monte-carlo") {
            cfg.oracle = OracleMode::monte_carlo;
        } else if (!name.empty()) {
            errors.push_back("key 'oracle' must be 'analytic' or 'monte-carlo'");
        }
    }
    read(doc, "oracle_draws", cfg.oracle_draws, errors, "a positive integer");
    read(doc, "solution", cfg.solution, errors, "an array of numbers");
    read(doc, "jobs", cfg.jobs, errors, "an integer");
    read(doc, "restarts", cfg.dro.restarts, errors, "an integer");
    read(doc, "max_cut_iterations", cfg.dro.max_cut_iterations, errors, "an integer");

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        for (const auto& p : e.problems()) errors.push_back(p);
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace elsaa
