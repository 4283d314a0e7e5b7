#include "daid/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "daid/errors.hpp"
#include "daid/version.hpp"

using nlohmann::json;

namespace daid {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double_strict(const std::string& s, const std::string& what, std::size_t line) {
    if (s.empty()) throw ParseError(what + ": empty number", line);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    // ERANGE with a finite result is gradual underflow to a subnormal;
    // those survive a %.17g round trip and are accepted.
    if (end != s.c_str() + s.size() || (errno == ERANGE && !std::isfinite(v)))
        throw ParseError(what + ": bad number `" + s + "`", line);
    return v;
}

std::int64_t parse_int_strict(const std::string& s, const std::string& what, std::size_t line) {
    if (s.empty()) throw ParseError(what + ": empty integer", line);
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        throw ParseError(what + ": bad integer `" + s + "`", line);
    return v;
}

void check_csv_token(const std::string& s, const std::string& what) {
    if (s.find_first_of(",\"\r\n") != std::string::npos)
        throw SchemaError(what + " `" + s + "` contains CSV-breaking characters");
}

SubgroupKey key_from_string(const std::string& s) {
    SubgroupKey key;
    for (const auto& part : split(s, '|'))
        key.values.push_back(static_cast<int>(parse_int_strict(part, "subgroup key", 0)));
    return key;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << content;
    if (!out) throw Error("write failed for " + path);
}

void save_dataset(const Dataset& ds, const std::string& path) {
    ds.validate();
    json schema;
    schema["spec_version"] = kSpecVersion;
    json attrs = json::array();
    for (std::size_t k = 0; k < ds.schema.num_attributes(); ++k) {
        check_csv_token(ds.schema.names[k], "attribute name");
        for (const auto& c : ds.schema.category_labels[k]) check_csv_token(c, "category label");
        attrs.push_back({{"name", ds.schema.names[k]},
                         {"categories", ds.schema.category_labels[k]}});
    }
    schema["attributes"] = attrs;

    std::ostringstream csv;
    csv << "id,label,domain";
    for (const auto& name : ds.schema.names) csv << ",attr_" << name;
    for (std::size_t j = 0; j < ds.d_in; ++j) csv << ",f_" << j;
    csv << "\n";
    for (const auto& s : ds.samples) {
        check_csv_token(s.domain, "domain");
        csv << s.id << "," << s.label << "," << s.domain;
        for (std::size_t k = 0; k < s.attrs.size(); ++k)
            csv << ","
                << ds.schema.category_labels[k][static_cast<std::size_t>(s.attrs[k])];
        for (double f : s.features) csv << "," << fmt_double(f);
        csv << "\n";
    }

    write_text_file(path, csv.str());
    write_text_file(path + ".schema.json", schema.dump(2) + "\n");
}

Dataset load_dataset(const std::string& path) {
    json schema_json;
    std::string sidecar_text;
    try {
        sidecar_text = read_text_file(path + ".schema.json");
    } catch (const Error& e) {
        throw SchemaError("missing schema sidecar for " + path + ": " + e.what());
    }
    try {
        schema_json = json::parse(sidecar_text);
    } catch (const json::exception& e) {
        throw SchemaError("bad schema sidecar for " + path + ": " + e.what());
    }
    Dataset ds;
    try {
        for (const auto& a : schema_json.at("attributes")) {
            ds.schema.names.push_back(a.at("name").get<std::string>());
            std::vector<std::string> cats = a.at("categories").get<std::vector<std::string>>();
            ds.schema.cardinalities.push_back(static_cast<int>(cats.size()));
            ds.schema.category_labels.push_back(std::move(cats));
        }
    } catch (const json::exception& e) {
        throw SchemaError("bad schema sidecar for " + path + ": " + e.what());
    }
    ds.schema.validate();

    // Category label -> index, per attribute.
    std::vector<std::map<std::string, int>> lookup(ds.schema.num_attributes());
    for (std::size_t k = 0; k < ds.schema.num_attributes(); ++k)
        for (std::size_t c = 0; c < ds.schema.category_labels[k].size(); ++c)
            lookup[k][ds.schema.category_labels[k][c]] = static_cast<int>(c);

    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw ParseError("dataset: missing header", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split(line, ',');
    const std::size_t k_attrs = ds.schema.num_attributes();
    if (header.size() < 3 + k_attrs + 1)
        throw SchemaError("dataset header too short for schema");
    if (header[0] != "id" || header[1] != "label" || header[2] != "domain")
        throw SchemaError("dataset header must start with id,label,domain");
    for (std::size_t k = 0; k < k_attrs; ++k) {
        const std::string want = "attr_" + ds.schema.names[k];
        if (header[3 + k] != want)
            throw SchemaError("dataset header: expected column `" + want + "`, found `" +
                              header[3 + k] + "`");
    }
    const std::size_t d = header.size() - 3 - k_attrs;
    ds.d_in = d;
    for (std::size_t j = 0; j < d; ++j) {
        const std::string want = "f_" + std::to_string(j);
        if (header[3 + k_attrs + j] != want)
            throw SchemaError("dataset header: expected column `" + want + "`, found `" +
                              header[3 + k_attrs + j] + "`");
    }

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw ParseError("dataset: expected " + std::to_string(header.size()) +
                                 " cells, found " + std::to_string(cells.size()),
                             lineno);
        Sample s;
        s.id = parse_int_strict(cells[0], "id", lineno);
        const std::int64_t label = parse_int_strict(cells[1], "label", lineno);
        if (label != 0 && label != 1) throw ParseError("label must be 0 or 1", lineno);
        s.label = static_cast<int>(label);
        s.domain = cells[2];
        s.attrs.resize(k_attrs);
        for (std::size_t k = 0; k < k_attrs; ++k) {
            const auto it = lookup[k].find(cells[3 + k]);
            if (it == lookup[k].end())
                throw ParseError("unknown category `" + cells[3 + k] + "` for attribute " +
                                     ds.schema.names[k],
                                 lineno);
            s.attrs[k] = it->second;
        }
        s.features.resize(d);
        for (std::size_t j = 0; j < d; ++j)
            s.features[j] = parse_double_strict(cells[3 + k_attrs + j], "feature", lineno);
        ds.samples.push_back(std::move(s));
    }
    ds.validate();
    return ds;
}

ConfigMap ConfigMap::parse(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("config: expected `key = value`", lineno);
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ParseError("config: empty key", lineno);
        for (char c : key)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_')
                throw ParseError("config: bad key `" + key + "`", lineno);
        if (cfg.values.count(key))
            throw ParseError("config: duplicate key `" + key + "`", lineno);
        cfg.values[key] = value;
    }
    return cfg;
}

ConfigMap ConfigMap::load(const std::string& path) { return parse(read_text_file(path)); }

bool ConfigMap::has(const std::string& key) const { return values.count(key) > 0; }

std::string ConfigMap::get_string(const std::string& key, const std::string& def) const {
    consumed.insert(key);
    const auto it = values.find(key);
    return it == values.end() ? def : it->second;
}

bool ConfigMap::get_bool(const std::string& key, bool def) const {
    consumed.insert(key);
    const auto it = values.find(key);
    if (it == values.end()) return def;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("config: " + key + " must be true/false, got `" + it->second + "`");
}

std::int64_t ConfigMap::get_int(const std::string& key, std::int64_t def) const {
    consumed.insert(key);
    const auto it = values.find(key);
    if (it == values.end()) return def;
    try {
        return parse_int_strict(it->second, key, 0);
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t def) const {
    consumed.insert(key);
    const auto it = values.find(key);
    if (it == values.end()) return def;
    const std::string& s = it->second;
    if (s.empty()) throw ConfigError("config: " + key + ": empty integer");
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE || s[0] == '-')
        throw ConfigError("config: " + key + ": bad unsigned integer `" + s + "`");
    return v;
}

double ConfigMap::get_double(const std::string& key, double def) const {
    consumed.insert(key);
    const auto it = values.find(key);
    if (it == values.end()) return def;
    try {
        return parse_double_strict(it->second, key, 0);
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
}

std::vector<double> ConfigMap::get_doubles(const std::string& key,
                                           const std::vector<double>& def) const {
    consumed.insert(key);
    const auto it = values.find(key);
    if (it == values.end()) return def;
    std::vector<double> out;
    try {
        for (const auto& part : split(it->second, ','))
            out.push_back(parse_double_strict(trim(part), key, 0));
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
    return out;
}

std::vector<std::size_t> ConfigMap::get_sizes(const std::string& key,
                                              const std::vector<std::size_t>& def) const {
    consumed.insert(key);
    const auto it = values.find(key);
    if (it == values.end()) return def;
    std::vector<std::size_t> out;
    for (const auto& part : split(it->second, ',')) {
        std::int64_t v;
        try {
            v = parse_int_strict(trim(part), key, 0);
        } catch (const ParseError& e) {
            throw ConfigError(e.what());
        }
        if (v < 0) throw ConfigError("config: " + key + " entries must be >= 0");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

void ConfigMap::reject_unknown() const {
    std::string unknown;
    for (const auto& [key, value] : values)
        if (!consumed.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
    if (!unknown.empty()) throw ConfigError("config: unknown keys: " + unknown);
}

namespace {

json moments_to_obj(const SubgroupMoments& m) {
    json groups = json::object();
    for (const auto& [key, mu] : m.mu)
        groups[key.to_string()] = {{"mu", mu}, {"var", m.var.at(key)}};
    return {{"eps", m.eps},
            {"fallback_mu", m.fallback_mu},
            {"fallback_var", m.fallback_var},
            {"groups", groups}};
}

SubgroupMoments moments_from_obj(const json& j) {
    SubgroupMoments m;
    m.eps = j.at("eps").get<double>();
    m.fallback_mu = j.at("fallback_mu").get<std::vector<double>>();
    m.fallback_var = j.at("fallback_var").get<std::vector<double>>();
    for (const auto& [key, val] : j.at("groups").items()) {
        const SubgroupKey k = key_from_string(key);
        m.mu[k] = val.at("mu").get<std::vector<double>>();
        m.var[k] = val.at("var").get<std::vector<double>>();
    }
    return m;
}

json propensity_to_obj(const PropensityTable& t) {
    json joint = json::object();
    for (const auto& [key, f] : t.joint) joint[key.to_string()] = f;
    return {{"marginals", t.marginals},
            {"joint", joint},
            {"use_joint", t.use_joint},
            {"allow_fallback", t.allow_fallback},
            {"normalization", t.normalization},
            {"weights", t.weights}};
}

PropensityTable propensity_from_obj(const json& j) {
    PropensityTable t;
    t.marginals = j.at("marginals").get<std::vector<std::vector<double>>>();
    for (const auto& [key, val] : j.at("joint").items())
        t.joint[key_from_string(key)] = val.get<double>();
    t.use_joint = j.at("use_joint").get<bool>();
    t.allow_fallback = j.at("allow_fallback").get<bool>();
    t.normalization = j.at("normalization").get<double>();
    t.weights = j.at("weights").get<std::vector<double>>();
    return t;
}

json matrix_to_obj(const Matrix& m) {
    return {{"rows", m.rows}, {"cols", m.cols}, {"w", m.data}};
}

Matrix matrix_from_obj(const json& j) {
    Matrix m;
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.data = j.at("w").get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols) throw SchemaError("checkpoint: matrix size mismatch");
    return m;
}

json train_config_to_obj(const TrainConfig& c) {
    return {{"hidden", c.hidden},
            {"d_h", c.d_h},
            {"r", c.r},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"lr", c.lr},
            {"weight_decay", c.weight_decay},
            {"lambda_attr", c.lambda_attr},
            {"lambda_ortho", c.lambda_ortho},
            {"pair_cap", c.pair_cap},
            {"seed", c.seed},
            {"reweight", c.reweight},
            {"normalize", c.normalize},
            {"attr", c.attr},
            {"ortho", c.ortho},
            {"align_space", to_string(c.align_space)},
            {"ortho_mode", to_string(c.ortho_mode)},
            {"weight_norm", to_string(c.weight_norm)},
            {"norm_stats", to_string(c.norm_stats)},
            {"joint_propensity", c.joint_propensity}};
}

TrainConfig train_config_from_obj(const json& j) {
    TrainConfig c;
    c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    c.d_h = j.at("d_h").get<std::size_t>();
    c.r = j.at("r").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::int64_t>();
    c.batch_size = j.at("batch_size").get<std::int64_t>();
    c.lr = j.at("lr").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.lambda_attr = j.at("lambda_attr").get<double>();
    c.lambda_ortho = j.at("lambda_ortho").get<double>();
    c.pair_cap = j.at("pair_cap").get<std::int64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.reweight = j.at("reweight").get<bool>();
    c.normalize = j.at("normalize").get<bool>();
    c.attr = j.at("attr").get<bool>();
    c.ortho = j.at("ortho").get<bool>();
    c.align_space = align_space_from_string(j.at("align_space").get<std::string>());
    c.ortho_mode = ortho_mode_from_string(j.at("ortho_mode").get<std::string>());
    c.weight_norm = weight_norm_from_string(j.at("weight_norm").get<std::string>());
    c.norm_stats = norm_stats_from_string(j.at("norm_stats").get<std::string>());
    c.joint_propensity = j.at("joint_propensity").get<bool>();
    return c;
}

}  // namespace

std::string moments_json(const SubgroupMoments& m) { return moments_to_obj(m).dump(2) + "\n"; }

SubgroupMoments moments_from_json(const std::string& text) {
    try {
        return moments_from_obj(json::parse(text));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad moments json: ") + e.what());
    }
}

std::string propensity_json(const PropensityTable& t) {
    return propensity_to_obj(t).dump(2) + "\n";
}

PropensityTable propensity_from_json(const std::string& text) {
    try {
        return propensity_from_obj(json::parse(text));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad propensity json: ") + e.what());
    }
}

void save_checkpoint(const TrainResult& model, const std::string& path) {
    json j;
    j["spec_version"] = kSpecVersion;
    j["version"] = kVersion;
    j["seed"] = model.config.seed;
    j["config"] = train_config_to_obj(model.config);

    json encoder = json::array();
    for (const auto& l : model.params.encoder) {
        json layer = matrix_to_obj(l.w);
        layer["b"] = l.b;
        encoder.push_back(layer);
    }
    j["params"] = {{"encoder", encoder},
                   {"proj", matrix_to_obj(model.params.proj)},
                   {"head_w", model.params.head_w},
                   {"head_b", model.params.head_b}};
    j["has_moments"] = model.has_moments;
    if (model.has_moments) j["moments"] = moments_to_obj(model.moments);
    if (model.config.reweight) j["propensity"] = propensity_to_obj(model.propensity);
    write_text_file(path, j.dump(2) + "\n");
}

TrainResult load_checkpoint(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw SchemaError("bad checkpoint " + path + ": " + e.what());
    }
    TrainResult model;
    try {
        model.config = train_config_from_obj(j.at("config"));
        for (const auto& layer : j.at("params").at("encoder")) {
            Layer l;
            l.w = matrix_from_obj(layer);
            l.b = layer.at("b").get<std::vector<double>>();
            model.params.encoder.push_back(std::move(l));
        }
        model.params.proj = matrix_from_obj(j.at("params").at("proj"));
        model.params.head_w = j.at("params").at("head_w").get<std::vector<double>>();
        model.params.head_b = j.at("params").at("head_b").get<double>();
        model.has_moments = j.at("has_moments").get<bool>();
        if (model.has_moments) model.moments = moments_from_obj(j.at("moments"));
        if (j.contains("propensity")) model.propensity = propensity_from_obj(j.at("propensity"));
    } catch (const json::exception& e) {
        throw SchemaError("bad checkpoint " + path + ": " + e.what());
    }
    model.params.validate();
    return model;
}

void save_history(const std::vector<EpochStats>& history, const std::string& path) {
    std::ostringstream out;
    out << "epoch,cls,attr,ortho,total,train_auc\n";
    for (const auto& e : history)
        out << e.epoch << "," << fmt_double(e.cls) << "," << fmt_double(e.attr) << ","
            << fmt_double(e.ortho) << "," << fmt_double(e.total) << ","
            << fmt_double(e.train_auc) << "\n";
    write_text_file(path, out.str());
}

std::vector<EpochStats> load_history(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw ParseError("history: missing header", 1);
    std::vector<EpochStats> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split(trim(line), ',');
        if (cells.size() != 6) throw ParseError("history: expected 6 cells", lineno);
        EpochStats e;
        e.epoch = parse_int_strict(cells[0], "epoch", lineno);
        e.cls = parse_double_strict(cells[1], "cls", lineno);
        e.attr = parse_double_strict(cells[2], "attr", lineno);
        e.ortho = parse_double_strict(cells[3], "ortho", lineno);
        e.total = parse_double_strict(cells[4], "total", lineno);
        e.train_auc = parse_double_strict(cells[5], "train_auc", lineno);
        out.push_back(e);
    }
    return out;
}

std::string metric_report_json(const MetricReport& rep, const AttributeSchema& schema,
                               const MetricConfig& cfg) {
    json groups = json::array();
    for (const auto& [key, n] : rep.n_by_group) {
        json g;
        g["key"] = key.to_string();
        g["label"] = key.label(schema);
        g["n"] = n;
        const auto auc_it = rep.auc_by_group.find(key);
        g["auc"] = auc_it == rep.auc_by_group.end() ? json(nullptr) : json(auc_it->second);
        const auto rate_it = rep.rate_by_group.find(key);
        g["rate"] = rate_it == rep.rate_by_group.end() ? json(nullptr) : json(rate_it->second);
        groups.push_back(g);
    }
    const json j = {{"spec_version", kSpecVersion},
                    {"auc_overall", rep.auc_overall},
                    {"skew", rep.skew},
                    {"rate_kind", to_string(cfg.rate_kind)},
                    {"tau", cfg.tau},
                    {"skew_eps", cfg.skew_eps},
                    {"groups", groups}};
    return j.dump(2) + "\n";
}

std::string radar_csv(const MetricReport& rep, const AttributeSchema& schema) {
    std::ostringstream out;
    out << "group,label,auc,rate,n\n";
    for (const auto& [key, n] : rep.n_by_group) {
        out << key.to_string() << "," << key.label(schema) << ",";
        const auto auc_it = rep.auc_by_group.find(key);
        if (auc_it != rep.auc_by_group.end()) out << fmt_double(auc_it->second);
        out << ",";
        const auto rate_it = rep.rate_by_group.find(key);
        if (rate_it != rep.rate_by_group.end()) out << fmt_double(rate_it->second);
        out << "," << n << "\n";
    }
    return out.str();
}

std::string ace_report_json(const AceReport& rep, const AttributeSchema& schema,
                            const std::vector<std::string>& dropped_dd) {
    json strata = json::array();
    for (const auto& row : rep.per_stratum)
        strata.push_back({{"dd", row.stratum.dd.to_string()},
                          {"label", row.stratum.dd.label(schema)},
                          {"mc", row.stratum.mc},
                          {"weight", row.stratum.weight},
                          {"f0", row.f0},
                          {"f1", row.f1},
                          {"diff", row.diff}});
    const json j = {{"spec_version", kSpecVersion},
                    {"ace", rep.ace},
                    {"mu0", rep.mu0},
                    {"ci_low", rep.ci_low},
                    {"ci_high", rep.ci_high},
                    {"p_value", rep.p_value},
                    {"B", rep.B},
                    {"alpha", rep.alpha},
                    {"seed", rep.seed},
                    {"n_redrawn", rep.n_redrawn},
                    {"n_forced_identity", rep.n_forced_identity},
                    {"dropped_dd", dropped_dd},
                    {"per_stratum", strata}};
    return j.dump(2) + "\n";
}

namespace {

json scm_config_to_obj(const ScmConfig& c) {
    return {{"n_train", c.n_train},
            {"n_test", c.n_test},
            {"d_in", c.d_in},
            {"group_marginals", c.group_marginals},
            {"shortcut_strength", c.shortcut_strength},
            {"signal_strength", c.signal_strength},
            {"shift_angle", c.shift_angle},
            {"label_noise", c.label_noise},
            {"seed", c.seed}};
}

ScmConfig scm_config_from_obj(const json& j) {
    ScmConfig c;
    c.n_train = j.at("n_train").get<std::int64_t>();
    c.n_test = j.at("n_test").get<std::int64_t>();
    c.d_in = j.at("d_in").get<std::size_t>();
    c.group_marginals = j.at("group_marginals").get<std::vector<std::vector<double>>>();
    c.shortcut_strength = j.at("shortcut_strength").get<double>();
    c.signal_strength = j.at("signal_strength").get<double>();
    c.shift_angle = j.at("shift_angle").get<double>();
    c.label_noise = j.at("label_noise").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

std::string ground_truth_json(const GroundTruth& gt) {
    const json j = {{"spec_version", kSpecVersion},
                    {"config", scm_config_to_obj(gt.config)},
                    {"expected_sign", gt.expected_sign},
                    {"signal_dim", gt.signal_dim},
                    {"shortcut_dims", gt.shortcut_dims},
                    {"rotated_dims", gt.rotated_dims},
                    {"couplings", gt.couplings}};
    return j.dump(2) + "\n";
}

GroundTruth ground_truth_from_json(const std::string& text) {
    GroundTruth gt;
    try {
        const json j = json::parse(text);
        gt.config = scm_config_from_obj(j.at("config"));
        gt.expected_sign = j.at("expected_sign").get<std::string>();
        gt.signal_dim = j.at("signal_dim").get<std::size_t>();
        gt.shortcut_dims = j.at("shortcut_dims").get<std::vector<std::size_t>>();
        gt.rotated_dims = j.at("rotated_dims").get<std::vector<std::size_t>>();
        gt.couplings = j.at("couplings").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad ground truth json: ") + e.what());
    }
    return gt;
}

}  // namespace daid
