#include "qf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qf/errors.hpp"
#include "qf/rng.hpp"

namespace qf {

namespace {

using json = nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& cell) {
    std::string t = trim(cell);
    return t.empty() || t == "NA" || t == "NaN" || t == "nan" || t == "?" ||
           t == "null";
}

bool parse_double(const std::string& cell, double& out) {
    std::string t = trim(cell);
    if (t.empty()) return false;
    const char* b = t.data();
    const char* e = b + t.size();
    if (*b == '+') ++b;  // from_chars rejects a leading plus
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

// RFC-4180 field splitting with quoted fields and "" escapes.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    long line = 1;

    auto end_field = [&] {
        row.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        records.push_back(std::move(row));
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
                if (c == '\n') ++line;
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            // swallowed; LF handles the row break
        } else if (c == '\n') {
            end_row();
            ++line;
        } else {
            field += c;
            field_started = true;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field", line);
    if (!field.empty() || !row.empty()) end_row();
    return records;
}

std::string fmt_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

int FeatureSpace::index_of(const std::string& name) const {
    for (std::size_t j = 0; j < features.size(); ++j)
        if (features[j].name == name) return static_cast<int>(j);
    return -1;
}

std::vector<int> FeatureSpace::group_member_indices(const std::string& source) const {
    std::vector<int> out;
    auto it = categorical_groups.find(source);
    if (it == categorical_groups.end()) return out;
    for (const auto& member : it->second) {
        int j = index_of(member);
        if (j >= 0) out.push_back(j);
    }
    return out;
}

double FeatureSpace::to_original(int j, double v) const {
    const Feature& f = features[j];
    double span = f.domain_hi - f.domain_lo;
    if (span <= 0.0) return f.lower;
    return f.lower + (v - f.domain_lo) / span * (f.upper - f.lower);
}

double FeatureSpace::from_original(int j, double v) const {
    const Feature& f = features[j];
    double span = f.upper - f.lower;
    if (span <= 0.0) return f.domain_lo;
    return f.domain_lo + (v - f.lower) / span * (f.domain_hi - f.domain_lo);
}

std::string FeatureSpace::active_category(const std::string& source,
                                          const Eigen::VectorXd& x) const {
    for (int j : group_member_indices(source))
        if (x[j] > 0.5) return features[j].category;
    return "";
}

Labelset Dataset::labelset(Eigen::Index i) const {
    Labelset ls(static_cast<std::size_t>(labels.cols()));
    for (Eigen::Index l = 0; l < labels.cols(); ++l) ls[l] = labels(i, l) ? 1 : 0;
    return ls;
}

SidecarSchema SidecarSchema::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid schema JSON: ") + e.what());
    }
    SidecarSchema s;
    if (j.contains("categorical"))
        s.categorical = j["categorical"].get<std::vector<std::string>>();
    if (j.contains("ordinal")) {
        for (auto it = j["ordinal"].begin(); it != j["ordinal"].end(); ++it) {
            std::map<std::string, double> m;
            if (it.value().is_object())
                m = it.value().get<std::map<std::string, double>>();
            else if (it.value().is_array()) {
                // list form: position defines the rank
                double rank = 0.0;
                for (const auto& v : it.value())
                    m[v.get<std::string>()] = rank++;
            }
            s.ordinal[it.key()] = std::move(m);
        }
    }
    if (j.contains("labels"))
        s.labels = j["labels"].get<std::vector<std::string>>();
    return s;
}

SidecarSchema SidecarSchema::from_file(const std::string& path) {
    return from_json_text(read_file(path));
}

Dataset load_csv(const std::string& path, const SidecarSchema& schema) {
    auto records = parse_csv(read_file(path));
    if (records.empty()) throw ParseError("empty CSV", 1);
    const auto& header = records[0];
    const std::size_t n_cols = header.size();
    const std::size_t n_rows = records.size() - 1;

    for (std::size_t r = 1; r < records.size(); ++r)
        if (records[r].size() != n_cols)
            throw ParseError("wrong field count: expected " +
                                 std::to_string(n_cols) + ", got " +
                                 std::to_string(records[r].size()),
                             static_cast<long>(r + 1));

    auto col_index = [&](const std::string& name) {
        for (std::size_t c = 0; c < n_cols; ++c)
            if (header[c] == name) return static_cast<long>(c);
        return -1L;
    };

    std::vector<long> label_cols;
    for (const auto& name : schema.labels) {
        long c = col_index(name);
        if (c < 0) throw SchemaError("unknown label column: " + name);
        label_cols.push_back(c);
    }
    std::vector<bool> is_label(n_cols, false);
    for (long c : label_cols) is_label[c] = true;

    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < n_cols; ++c)
        if (!is_label[c]) feature_cols.push_back(c);
    for (const auto& name : schema.categorical)
        if (col_index(name) < 0)
            throw SchemaError("unknown categorical column: " + name);
    for (const auto& [name, m] : schema.ordinal)
        if (col_index(name) < 0)
            throw SchemaError("unknown ordinal column: " + name);

    Dataset ds;
    ds.rows.resize(n_rows, static_cast<Eigen::Index>(feature_cols.size()));
    ds.labels.resize(n_rows, static_cast<Eigen::Index>(label_cols.size()));
    ds.label_names = schema.labels;

    for (std::size_t fj = 0; fj < feature_cols.size(); ++fj) {
        std::size_t c = feature_cols[fj];
        Feature feat;
        feat.name = header[c];
        bool categorical = std::find(schema.categorical.begin(),
                                     schema.categorical.end(),
                                     feat.name) != schema.categorical.end();
        auto ord_it = schema.ordinal.find(feat.name);

        if (categorical) {
            feat.kind = FeatureKind::Categorical;
            // collect values, assign codes by sorted distinct value
            std::vector<std::string> cells(n_rows);
            std::map<std::string, std::size_t> freq;
            for (std::size_t r = 0; r < n_rows; ++r) {
                cells[r] = trim(records[r + 1][c]);
                if (!is_missing(cells[r])) ++freq[cells[r]];
            }
            if (freq.empty())
                throw SchemaError("categorical column has no values: " + feat.name);
            std::string mode = freq.begin()->first;
            for (const auto& [v, n] : freq)
                if (n > freq[mode]) mode = v;  // ties keep the smaller value
            for (const auto& [v, n] : freq) feat.categories.push_back(v);
            auto code_of = [&](const std::string& v) {
                auto it = std::lower_bound(feat.categories.begin(),
                                           feat.categories.end(), v);
                return static_cast<double>(it - feat.categories.begin());
            };
            for (std::size_t r = 0; r < n_rows; ++r)
                ds.rows(r, fj) = code_of(is_missing(cells[r]) ? mode : cells[r]);
            feat.lower = 0.0;
            feat.upper = static_cast<double>(feat.categories.size() - 1);
        } else {
            feat.kind = ord_it != schema.ordinal.end() ? FeatureKind::Ordinal
                                                       : FeatureKind::Numeric;
            if (feat.kind == FeatureKind::Ordinal) feat.ordinal_map = ord_it->second;
            std::vector<double> vals(n_rows,
                                     std::numeric_limits<double>::quiet_NaN());
            double sum = 0.0;
            std::size_t present = 0;
            for (std::size_t r = 0; r < n_rows; ++r) {
                const std::string& cell = records[r + 1][c];
                if (is_missing(cell)) continue;
                double v;
                if (feat.kind == FeatureKind::Ordinal) {
                    auto m = feat.ordinal_map.find(trim(cell));
                    if (m != feat.ordinal_map.end())
                        v = m->second;
                    else if (!parse_double(cell, v))
                        throw ParseError("value not in ordinal map for '" +
                                             feat.name + "': " + trim(cell),
                                         static_cast<long>(r + 2));
                } else if (!parse_double(cell, v)) {
                    throw ParseError("not a number in column '" + feat.name +
                                         "': " + trim(cell),
                                     static_cast<long>(r + 2));
                }
                vals[r] = v;
                sum += v;
                ++present;
            }
            double mean = present ? sum / static_cast<double>(present) : 0.0;
            for (std::size_t r = 0; r < n_rows; ++r)
                ds.rows(r, fj) = std::isnan(vals[r]) ? mean : vals[r];
            feat.lower = ds.rows.col(fj).minCoeff();
            feat.upper = ds.rows.col(fj).maxCoeff();
        }
        feat.domain_lo = feat.lower;
        feat.domain_hi = feat.upper;
        ds.space.features.push_back(std::move(feat));
    }

    for (std::size_t lj = 0; lj < label_cols.size(); ++lj) {
        std::size_t c = label_cols[lj];
        for (std::size_t r = 0; r < n_rows; ++r) {
            double v;
            if (!parse_double(records[r + 1][c], v) ||
                (v != 0.0 && v != 1.0))
                throw ParseError("label column '" + header[c] +
                                     "' must be 0/1",
                                 static_cast<long>(r + 2));
            ds.labels(r, lj) = static_cast<int>(v);
        }
    }
    return ds;
}

Dataset load_csv(const std::string& path,
                 const std::vector<std::string>& label_columns) {
    SidecarSchema s;
    s.labels = label_columns;
    return load_csv(path, s);
}

Dataset minmax_scale(Dataset ds) {
    for (Eigen::Index j = 0; j < ds.n_features(); ++j) {
        Feature& f = ds.space.features[j];
        if (f.kind != FeatureKind::Numeric && f.kind != FeatureKind::Ordinal)
            continue;
        double lo = f.domain_lo, hi = f.domain_hi;
        if (hi > lo)
            ds.rows.col(j) = (ds.rows.col(j).array() - lo) / (hi - lo);
        else
            ds.rows.col(j).setZero();
        f.domain_lo = 0.0;
        f.domain_hi = 1.0;
    }
    ds.scaled = true;
    return ds;
}

Dataset onehot_encode(Dataset ds, const std::string& feature) {
    if (ds.space.categorical_groups.count(feature))
        throw SchemaError("feature already one-hot encoded: " + feature);
    int j = ds.space.index_of(feature);
    if (j < 0) throw SchemaError("feature not found: " + feature);
    const Feature src = ds.space.features[j];
    if (src.kind != FeatureKind::Categorical)
        throw SchemaError("feature is not categorical: " + feature);
    if (src.categories.size() < 2)
        throw ArgError("categorical feature needs at least 2 values: " + feature);

    const Eigen::Index n = ds.n_rows();
    const Eigen::Index F = ds.n_features();
    const Eigen::Index k = static_cast<Eigen::Index>(src.categories.size());

    Eigen::MatrixXd out(n, F - 1 + k);
    out.leftCols(j) = ds.rows.leftCols(j);
    for (Eigen::Index m = 0; m < k; ++m)
        out.col(j + m) =
            (ds.rows.col(j).array() == static_cast<double>(m)).cast<double>();
    out.rightCols(F - j - 1) = ds.rows.rightCols(F - j - 1);
    ds.rows = std::move(out);

    std::vector<Feature> feats;
    feats.reserve(ds.space.features.size() - 1 + k);
    std::vector<std::string> member_names;
    for (Eigen::Index c = 0; c < F; ++c) {
        if (c == j) {
            for (const auto& value : src.categories) {
                Feature m;
                m.name = feature + "_" + value;
                m.kind = FeatureKind::OneHotMember;
                m.lower = 0.0;
                m.upper = 1.0;
                m.domain_lo = 0.0;
                m.domain_hi = 1.0;
                m.source = feature;
                m.category = value;
                member_names.push_back(m.name);
                feats.push_back(std::move(m));
            }
        } else {
            feats.push_back(ds.space.features[c]);
        }
    }
    ds.space.features = std::move(feats);
    ds.space.categorical_groups[feature] = std::move(member_names);
    return ds;
}

Dataset preprocess(Dataset ds) {
    ds = minmax_scale(std::move(ds));
    std::vector<std::string> pending;
    for (const auto& f : ds.space.features)
        if (f.kind == FeatureKind::Categorical) pending.push_back(f.name);
    for (const auto& name : pending) ds = onehot_encode(std::move(ds), name);
    return ds;
}

Eigen::VectorXd row_to_model_units(const Dataset& raw, Eigen::Index i,
                                   const FeatureSpace& model_space) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(model_space.features.size()));
    for (std::size_t j = 0; j < model_space.features.size(); ++j) {
        const Feature& f = model_space.features[j];
        if (f.kind == FeatureKind::OneHotMember) {
            int rj = raw.space.index_of(f.source);
            if (rj < 0)
                throw SchemaError("model expects categorical column: " + f.source);
            const Feature& rf = raw.space.features[rj];
            if (rf.kind != FeatureKind::Categorical)
                throw SchemaError("column is not categorical: " + f.source);
            auto code = static_cast<std::size_t>(raw.rows(i, rj));
            const std::string& cat = rf.categories.at(code);
            x[static_cast<Eigen::Index>(j)] = (cat == f.category) ? 1.0 : 0.0;
        } else {
            int rj = raw.space.index_of(f.name);
            if (rj < 0) throw SchemaError("model expects column: " + f.name);
            double v = model_space.from_original(static_cast<int>(j),
                                                 raw.rows(i, rj));
            x[static_cast<Eigen::Index>(j)] =
                std::clamp(v, f.domain_lo, f.domain_hi);
        }
    }
    return x;
}

Dataset to_model_units(const Dataset& raw, const FeatureSpace& model_space) {
    // check unseen categories up front so errors name the row
    for (const auto& [source, members] : model_space.categorical_groups) {
        int rj = raw.space.index_of(source);
        if (rj < 0)
            throw SchemaError("model expects categorical column: " + source);
        const Feature& rf = raw.space.features[rj];
        for (const auto& cat : rf.categories) {
            bool known = false;
            for (int mj : model_space.group_member_indices(source))
                if (model_space.features[mj].category == cat) known = true;
            if (!known)
                throw SchemaError("category unseen at training time: " + source +
                                  "=" + cat);
        }
    }
    Dataset out;
    out.space = model_space;
    out.label_names = raw.label_names;
    out.labels = raw.labels;
    out.scaled = true;
    out.rows.resize(raw.n_rows(),
                    static_cast<Eigen::Index>(model_space.features.size()));
    for (Eigen::Index i = 0; i < raw.n_rows(); ++i)
        out.rows.row(i) = row_to_model_units(raw, i, model_space);
    return out;
}

Dataset generate_ai4i_like(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ArgError("generate_ai4i_like: n must be >= 1");

    struct Spec {
        const char* name;
        FeatureKind kind;
        double lo, hi;
    };
    const Spec specs[6] = {
        {"Type", FeatureKind::Ordinal, 1.0, 3.0},
        {"Air temperature [K]", FeatureKind::Numeric, 295.6, 304.4},
        {"Process temperature [K]", FeatureKind::Numeric, 306.1, 313.7},
        {"Rotational speed [rpm]", FeatureKind::Numeric, 1212.0, 2874.0},
        {"Torque [Nm]", FeatureKind::Numeric, 4.2, 76.2},
        {"Tool wear [min]", FeatureKind::Numeric, 0.0, 251.0},
    };

    Dataset ds;
    for (const auto& s : specs) {
        Feature f;
        f.name = s.name;
        f.kind = s.kind;
        f.lower = f.domain_lo = s.lo;
        f.upper = f.domain_hi = s.hi;
        ds.space.features.push_back(std::move(f));
    }
    ds.label_names = {"TWF", "PWF", "OSF"};
    ds.rows.resize(static_cast<Eigen::Index>(n), 6);
    ds.labels.resize(static_cast<Eigen::Index>(n), 3);

    Rng rng(seed);
    constexpr double kRadPerMin = 2.0 * 3.14159265358979323846 / 60.0;
    for (std::size_t i = 0; i < n; ++i) {
        double type, air, process, speed, torque, wear;
        int twf, pwf, osf;
        do {
            type = 1.0 + static_cast<double>(rng.below(3));
            air = rng.in_range(295.6, 304.4);
            process = rng.in_range(306.1, 313.7);
            speed = rng.in_range(1212.0, 2874.0);
            torque = rng.in_range(4.2, 76.2);
            wear = rng.in_range(0.0, 251.0);
            double power = torque * speed * kRadPerMin;
            twf = (wear > 230.0 && air > 300.0) ? 1 : 0;
            pwf = (power < 2000.0 || power > 11600.0) ? 1 : 0;
            osf = (wear * torque > 12000.0 + 500.0 * type) ? 1 : 0;
        } while (!(twf || pwf || osf));
        Eigen::Index r = static_cast<Eigen::Index>(i);
        ds.rows(r, 0) = type;
        ds.rows(r, 1) = air;
        ds.rows(r, 2) = process;
        ds.rows(r, 3) = speed;
        ds.rows(r, 4) = torque;
        ds.rows(r, 5) = wear;
        ds.labels(r, 0) = twf;
        ds.labels(r, 1) = pwf;
        ds.labels(r, 2) = osf;
    }
    return ds;
}

std::string to_csv(const Dataset& ds) {
    std::string out;
    for (Eigen::Index j = 0; j < ds.n_features(); ++j) {
        if (j) out += ',';
        out += csv_escape(ds.space.features[j].name);
    }
    for (const auto& name : ds.label_names) {
        out += ',';
        out += csv_escape(name);
    }
    out += '\n';
    for (Eigen::Index i = 0; i < ds.n_rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.n_features(); ++j) {
            if (j) out += ',';
            const Feature& f = ds.space.features[j];
            if (f.kind == FeatureKind::Categorical)
                out += csv_escape(
                    f.categories.at(static_cast<std::size_t>(ds.rows(i, j))));
            else
                out += fmt_number(ds.rows(i, j));
        }
        for (Eigen::Index l = 0; l < ds.n_labels(); ++l) {
            out += ',';
            out += std::to_string(ds.labels(i, l));
        }
        out += '\n';
    }
    return out;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << to_csv(ds);
    if (!out) throw IoError("write failed: " + path);
}

std::string sidecar_json(const Dataset& ds) {
    json j;
    j["categorical"] = json::array();
    j["ordinal"] = json::object();
    for (const auto& f : ds.space.features) {
        if (f.kind == FeatureKind::Categorical)
            j["categorical"].push_back(f.name);
        else if (f.kind == FeatureKind::Ordinal)
            j["ordinal"][f.name] = f.ordinal_map;
    }
    j["labels"] = ds.label_names;
    return j.dump(2) + "\n";
}

} // namespace qf
