#include "imcmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "imcmc/models.hpp"

namespace imcmc {

namespace {

// --- TOML subset ---------------------------------------------------------

struct TomlParser {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;

    explicit TomlParser(const std::string& t) : text(t) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("config line " + std::to_string(line) + ": " + msg);
    }

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char get() {
        char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }

    void skip_ws(bool include_newlines) {
        while (!eof()) {
            char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || (include_newlines && c == '\n')) {
                get();
            } else {
                break;
            }
        }
    }

    std::string parse_key() {
        skip_ws(false);
        if (eof()) fail("expected key");
        if (peek() == '"') return parse_string();
        std::string key;
        while (!eof()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')
                key += get();
            else
                break;
        }
        if (key.empty()) fail("expected key");
        return key;
    }

    std::string parse_string() {
        if (get() != '"') fail("expected string");
        std::string s;
        while (!eof()) {
            char c = get();
            if (c == '"') return s;
            if (c == '\n') fail("unterminated string");
            if (c == '\\') {
                if (eof()) fail("dangling escape");
                char e = get();
                switch (e) {
                    case '"': s += '"'; break;
                    case '\\': s += '\\'; break;
                    case 'n': s += '\n'; break;
                    case 't': s += '\t'; break;
                    default: fail("unsupported escape");
                }
            } else {
                s += c;
            }
        }
        fail("unterminated string");
    }

    nlohmann::json parse_value() {
        skip_ws(true);
        if (eof()) fail("expected value");
        char c = peek();
        if (c == '"') return parse_string();
        if (c == '[') {
            get();
            nlohmann::json arr = nlohmann::json::array();
            skip_ws(true);
            if (!eof() && peek() == ']') {
                get();
                return arr;
            }
            while (true) {
                arr.push_back(parse_value());
                skip_ws(true);
                if (eof()) fail("unterminated array");
                char d = get();
                if (d == ']') break;
                if (d != ',') fail("expected ',' or ']' in array");
                skip_ws(true);
                if (!eof() && peek() == ']') {  // trailing comma
                    get();
                    break;
                }
            }
            return arr;
        }
        // bare scalar: bool or number
        std::string tok;
        while (!eof()) {
            char d = peek();
            if (d == ',' || d == ']' || d == '\n' || d == '#' || d == ' ' || d == '\t' ||
                d == '\r')
                break;
            tok += get();
        }
        if (tok == "true") return true;
        if (tok == "false") return false;
        if (tok.empty()) fail("expected value");
        try {
            if (tok.find_first_of(".eE") == std::string::npos &&
                tok.find("inf") == std::string::npos && tok.find("nan") == std::string::npos) {
                std::size_t used = 0;
                long long v = std::stoll(tok, &used);
                if (used == tok.size()) return v;
            }
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) fail("bad number '" + tok + "'");
            return v;
        } catch (const std::exception&) {
            fail("bad value '" + tok + "'");
        }
    }

    nlohmann::json parse_document() {
        nlohmann::json doc = nlohmann::json::object();
        nlohmann::json* table = &doc;
        while (true) {
            skip_ws(true);
            if (eof()) break;
            if (peek() == '[') {
                get();
                std::vector<std::string> parts;
                parts.push_back(parse_key());
                skip_ws(false);
                while (!eof() && peek() == '.') {
                    get();
                    parts.push_back(parse_key());
                    skip_ws(false);
                }
                if (eof() || get() != ']') fail("expected ']' after table name");
                table = &doc;
                for (const auto& p : parts) table = &(*table)[p];
                if (!table->is_object() && !table->is_null())
                    fail("table name collides with a value");
                continue;
            }
            std::string key = parse_key();
            skip_ws(false);
            if (eof() || get() != '=') fail("expected '=' after key '" + key + "'");
            (*table)[key] = parse_value();
            skip_ws(false);
            if (!eof() && peek() != '\n' && peek() != '#') fail("trailing characters after value");
        }
        return doc;
    }
};

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

}  // namespace

nlohmann::json parse_toml(const std::string& text) {
    TomlParser p(text);
    return p.parse_document();
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config root must be a table/object");
    ExperimentConfig c;
    c.model = get_or<std::string>(j, "model", c.model);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer())
            throw ConfigError("seed must be an integer");
        c.seed = j.at("seed").get<std::uint64_t>();
        c.has_seed = true;
    }
    c.horizon = get_or<std::int64_t>(j, "horizon", c.horizon);
    c.replicates = get_or<int>(j, "replicates", c.replicates);
    c.workers = get_or<int>(j, "workers", c.workers);
    c.out_dir = get_or<std::string>(j, "out", c.out_dir);
    c.kernel = get_or<std::string>(j, "kernel", c.kernel);
    c.mh_steps = get_or<int>(j, "mh_steps", c.mh_steps);
    c.path_levels = get_or<int>(j, "path_levels", c.path_levels);
    c.burn_in = get_or<std::int64_t>(j, "burn_in", c.burn_in);
    if (j.contains("suites")) {
        c.suites.clear();
        for (const auto& s : j.at("suites")) c.suites.push_back(s.get<std::string>());
    }
    if (j.contains("kernels")) {
        for (const auto& [key, value] : j.at("kernels").items()) {
            try {
                c.kernel_overrides[std::stoi(key)] = value.get<std::string>();
            } catch (const std::exception&) {
                throw ConfigError("kernels table keys must be level indices");
            }
        }
    }
    if (j.contains("inline")) c.inline_model = j.at("inline");

    if (!c.has_seed) throw ConfigError("seed is mandatory");
    if (c.replicates < 1) throw ConfigError("replicates must be >= 1");
    if (c.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (c.burn_in < 0) throw ConfigError("burn_in must be >= 0");
    if (c.out_dir.empty()) throw ConfigError("output directory must not be empty");
    for (const auto& s : c.suites)
        if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end())
            throw ConfigError("unknown suite '" + s + "'");
    if (c.kernel != "direct-phi" && c.kernel != "mh")
        throw ConfigError("kernel must be 'direct-phi' or 'mh'");
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    std::string text = ss.str();
    nlohmann::json doc;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        doc = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
        if (doc.is_discarded()) throw ConfigError("invalid JSON in '" + path + "'");
    } else {
        doc = parse_toml(text);
    }
    return config_from_json(doc);
}

FeynmanKacModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("inline model must be a table");
    int levels = get_or<int>(j, "levels", -1);
    if (levels < 1) throw ConfigError("inline model needs levels >= 1");
    std::vector<std::string> labels;
    if (j.contains("labels"))
        for (const auto& s : j.at("labels")) labels.push_back(s.get<std::string>());
    if (labels.empty()) throw ConfigError("inline model needs state labels");

    FeynmanKacModel model;
    for (int l = 0; l <= levels; ++l) model.spaces.push_back(StateSpace::make(l, labels));

    std::vector<double> init = get_or<std::vector<double>>(j, "initial", {});
    if (init.size() != labels.size()) throw ConfigError("initial size mismatch");
    model.initial = DiscreteMeasure(model.spaces[0], std::move(init));
    double mass = model.initial.mass();
    if (!(mass > 0.0)) throw ConfigError("initial has no mass");
    for (double& w : model.initial.weights) w /= mass;

    if (!j.contains("potentials") || !j.at("potentials").is_array() ||
        static_cast<int>(j.at("potentials").size()) != levels)
        throw ConfigError("need one potential vector per level 0..levels-1");
    for (const auto& g : j.at("potentials")) {
        std::vector<double> v = g.get<std::vector<double>>();
        if (v.size() != labels.size()) throw ConfigError("potential size mismatch");
        model.potentials.push_back(std::move(v));
    }

    if (!j.contains("transitions") || !j.at("transitions").is_array() ||
        static_cast<int>(j.at("transitions").size()) != levels)
        throw ConfigError("need one transition matrix per level 1..levels");
    int l = 0;
    for (const auto& t : j.at("transitions")) {
        std::vector<double> rows;
        for (const auto& row : t) {
            std::vector<double> r = row.get<std::vector<double>>();
            if (r.size() != labels.size()) throw ConfigError("transition row size mismatch");
            rows.insert(rows.end(), r.begin(), r.end());
        }
        if (rows.size() != labels.size() * labels.size())
            throw ConfigError("transition matrix shape mismatch");
        model.transitions.emplace_back(model.spaces[l], model.spaces[l + 1], std::move(rows));
        ++l;
    }
    model.validate();
    return model;
}

ExperimentPlan make_plan(const ExperimentConfig& config) {
    ExperimentPlan plan;
    plan.model_name = config.model;
    plan.seed = config.seed;
    plan.horizon = config.horizon;
    plan.replicates = config.replicates;
    plan.workers = config.workers;
    plan.suites = config.suites;
    plan.path_track_levels = config.path_levels;
    plan.burn_in = config.burn_in;
    plan.checkpoints = dyadic_checkpoints(6, 14, config.horizon);

    if (config.model == "bilaplace-continuous") {
        plan.continuous = bilaplace_model();
        plan.continuous_kernel = config.kernel == "mh" ? ContinuousKernel::MetropolisHastings
                                                       : ContinuousKernel::DirectPhi;
        plan.kernel_label = config.kernel;
        // Only rate-shape diagnostics make sense here.
        for (const auto& s : plan.suites)
            if (s != "rates")
                throw ConfigError("continuous models support the 'rates' suite only");
        if (config.burn_in > 0)
            throw ConfigError("burn_in applies to finite models only");
        return plan;
    }

    if (config.model == "inline") {
        if (!config.inline_model) throw ConfigError("model 'inline' needs an [inline] table");
        plan.model = model_from_json(*config.inline_model);
    } else {
        plan.model = make_bundled_model(config.model);
    }

    const FeynmanKacModel& model = *plan.model;
    const int m = model.num_levels();
    for (const auto& [level, name] : config.kernel_overrides)
        if (level < 0 || level > m)
            throw ConfigError("kernel override references level " + std::to_string(level) +
                              " outside 0.." + std::to_string(m));

    auto wants = [&](const char* s) {
        return std::find(plan.suites.begin(), plan.suites.end(), s) != plan.suites.end();
    };
    if (wants("uniform") && m + 1 < 8)
        throw ConfigError("the uniform suite needs a model with at least 8 levels");
    if (wants("stability") && m < 2)
        throw ConfigError("the stability suite needs at least two transitions");
    if (wants("concentration") && model.spaces[0]->size() != model.spaces[1]->size())
        throw ConfigError("the concentration suite needs a square level-1 transition");

    std::string base_choice = "base-mcmc";
    if (auto it0 = config.kernel_overrides.find(0); it0 != config.kernel_overrides.end())
        base_choice = it0->second;
    if (base_choice == "direct-phi") {
        plan.specs.emplace_back(DirectPhiSpec{});  // iid draws from pi^(0)
    } else if (base_choice == "base-mcmc") {
        plan.specs.push_back(default_base_spec(model));
    } else {
        throw ConfigError("level 0 kernel must be 'base-mcmc' or 'direct-phi'");
    }
    std::string label = base_choice;
    for (int k = 1; k <= m; ++k) {
        std::string choice = config.kernel;
        auto it = config.kernel_overrides.find(k);
        if (it != config.kernel_overrides.end()) choice = it->second;
        if (choice == "direct-phi") {
            plan.specs.emplace_back(DirectPhiSpec{});
        } else if (choice == "mh") {
            if (!model.path)
                throw ConfigError("level " + std::to_string(k) +
                                  ": MH kernels need a path-space model");
            plan.specs.emplace_back(
                MetropolisHastingsSpec{fk3_path_proposal(model, k), config.mh_steps});
        } else {
            throw ConfigError("unknown kernel '" + choice + "'");
        }
        label += "+" + choice;
    }
    plan.kernel_label = label;
    return plan;
}

}  // namespace imcmc
