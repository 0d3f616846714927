#include "precisen/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "precisen/error.hpp"

namespace precisen {

namespace {

constexpr const char* kModule = "cli_reporting";

[[noreturn]] void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, kModule, message);
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(trim(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(trim(field));
    return fields;
}

bool is_missing(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == ".";
}

std::optional<double> parse_number(const std::string& s) {
    if (is_missing(s)) {
        return std::nullopt;
    }
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (*begin == '+') {
        ++begin;
    }
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::string row_list(const std::vector<std::size_t>& rows) {
    std::ostringstream out;
    const std::size_t shown = std::min<std::size_t>(rows.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
        out << (i ? ", " : "") << rows[i];
    }
    if (rows.size() > shown) {
        out << ", ... (" << rows.size() << " total)";
    }
    return out.str();
}

} // namespace

BinarySpec parse_binary_spec(const std::string& text) {
    BinarySpec spec;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
        spec.column = trim(text);
    } else {
        spec.column = trim(text.substr(0, eq));
        spec.level_one = trim(text.substr(eq + 1));
    }
    if (spec.column.empty()) {
        fail(ErrorKind::configuration, "empty --binary column name");
    }
    return spec;
}

IngestedCohort ingest_csv(const std::filesystem::path& path, const CsvSpec& spec) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::ingestion, "cannot open '" + path.string() + "'");
    }
    if (spec.predictors.empty()) {
        fail(ErrorKind::configuration, "at least one predictor column is required");
    }
    if (spec.outcome.empty()) {
        fail(ErrorKind::configuration, "an outcome column is required");
    }

    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) {
        fail(ErrorKind::ingestion, "'" + path.string() + "' is empty or has no header row");
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    const auto header = split_record(line);
    std::map<std::string, std::size_t> column_of;
    for (std::size_t i = 0; i < header.size(); ++i) {
        column_of.emplace(header[i], i);
    }
    auto require = [&](const std::string& name) {
        auto it = column_of.find(name);
        if (it == column_of.end()) {
            fail(ErrorKind::ingestion, "column '" + name + "' not found in header");
        }
        return it->second;
    };

    std::map<std::string, BinarySpec> binary;
    for (const auto& b : spec.binary) {
        if (std::find(spec.predictors.begin(), spec.predictors.end(), b.column) == spec.predictors.end()) {
            fail(ErrorKind::configuration, "--binary column '" + b.column + "' is not a declared predictor");
        }
        binary[b.column] = b;
    }

    std::vector<PredictorSpec> predictors;
    std::vector<std::size_t> predictor_cols;
    for (const auto& name : spec.predictors) {
        PredictorSpec ps{name, PredictorKind::continuous, ""};
        if (auto it = binary.find(name); it != binary.end()) {
            ps.kind = PredictorKind::binary;
            ps.level_one = it->second.level_one.value_or("1");
        }
        predictors.push_back(ps);
        predictor_cols.push_back(require(name));
    }
    const std::size_t outcome_col = require(spec.outcome);
    std::vector<std::size_t> subgroup_cols;
    for (const auto& name : spec.subgroups) {
        subgroup_cols.push_back(require(name));
    }

    const std::size_t p = predictors.size();
    std::vector<std::vector<double>> values(p);
    std::vector<double> outcome;
    std::vector<std::vector<std::string>> subgroup_raw(spec.subgroups.size());
    std::vector<std::set<std::string>> binary_labels(p);
    std::vector<std::size_t> rejected;

    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++data_row;
        const auto fields = split_record(line);
        auto field = [&](std::size_t col) -> const std::string* {
            return col < fields.size() ? &fields[col] : nullptr;
        };

        bool ok = true;
        std::vector<double> row(p);
        for (std::size_t j = 0; j < p && ok; ++j) {
            const std::string* f = field(predictor_cols[j]);
            if (f == nullptr || is_missing(*f)) {
                ok = false;
                break;
            }
            if (predictors[j].kind == PredictorKind::binary) {
                const auto& level = binary[predictors[j].name].level_one;
                if (level) {
                    binary_labels[j].insert(*f);
                    row[j] = (*f == *level) ? 1.0 : 0.0;
                } else {
                    auto v = parse_number(*f);
                    if (!v || (*v != 0.0 && *v != 1.0)) {
                        fail(ErrorKind::ingestion, "binary column '" + predictors[j].name + "' holds '" + *f +
                                                       "' at data row " + std::to_string(data_row) +
                                                       "; use --binary " + predictors[j].name +
                                                       "=<label coded 1> for labelled columns");
                    }
                    row[j] = *v;
                }
            } else {
                auto v = parse_number(*f);
                if (!v) {
                    ok = false;
                    break;
                }
                row[j] = *v;
            }
        }
        std::optional<double> y;
        if (ok) {
            const std::string* f = field(outcome_col);
            y = f ? parse_number(*f) : std::nullopt;
            ok = y.has_value();
        }
        std::vector<std::string> groups;
        for (std::size_t g = 0; g < subgroup_cols.size() && ok; ++g) {
            const std::string* f = field(subgroup_cols[g]);
            if (f == nullptr || is_missing(*f)) {
                ok = false;
            } else {
                groups.push_back(*f);
            }
        }
        if (!ok) {
            rejected.push_back(data_row);
            continue;
        }
        for (std::size_t j = 0; j < p; ++j) {
            values[j].push_back(row[j]);
        }
        outcome.push_back(*y);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            subgroup_raw[g].push_back(groups[g]);
        }
    }

    if (data_row == 0) {
        fail(ErrorKind::ingestion, "'" + path.string() + "' has a header but no data rows");
    }
    if (!rejected.empty() && !spec.allow_incomplete) {
        fail(ErrorKind::ingestion, std::to_string(rejected.size()) +
                                       " row(s) have missing or unparseable declared fields (data rows " +
                                       row_list(rejected) + "); pass --allow-incomplete to drop them");
    }

    std::vector<std::string> warnings;
    if (!rejected.empty()) {
        warnings.push_back("dropped " + std::to_string(rejected.size()) + " incomplete row(s): " +
                                  row_list(rejected));
    }
    for (std::size_t j = 0; j < p; ++j) {
        if (binary_labels[j].size() > 2) {
            fail(ErrorKind::ingestion, "binary column '" + predictors[j].name + "' has more than two labels");
        }
        if (predictors[j].kind == PredictorKind::binary && binary[predictors[j].name].level_one &&
            !binary_labels[j].count(*binary[predictors[j].name].level_one)) {
            fail(ErrorKind::ingestion, "label '" + *binary[predictors[j].name].level_one +
                                           "' never occurs in binary column '" + predictors[j].name + "'");
        }
    }

    const std::size_t n = outcome.size();
    if (n < p + 2) {
        fail(ErrorKind::insufficient_rows, "need at least p + 2 = " + std::to_string(p + 2) +
                                               " complete rows, found " + std::to_string(n));
    }

    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[j][i];
        }
        const auto [lo, hi] = std::minmax_element(values[j].begin(), values[j].end());
        if (*lo == *hi) {
            warnings.push_back("predictor '" + predictors[j].name +
                                      "' is constant and is collinear with the intercept");
        }
    }
    Vector y = Eigen::Map<const Vector>(outcome.data(), static_cast<Eigen::Index>(n));

    std::map<std::string, Categorical> subgroups;
    for (std::size_t g = 0; g < spec.subgroups.size(); ++g) {
        std::set<std::string> distinct(subgroup_raw[g].begin(), subgroup_raw[g].end());
        Categorical cat;
        cat.levels.assign(distinct.begin(), distinct.end());
        std::map<std::string, std::uint32_t> code;
        for (std::size_t l = 0; l < cat.levels.size(); ++l) {
            code[cat.levels[l]] = static_cast<std::uint32_t>(l);
        }
        for (const auto& v : subgroup_raw[g]) {
            cat.codes.push_back(code[v]);
        }
        subgroups[spec.subgroups[g]] = std::move(cat);
    }

    return IngestedCohort{Cohort::from_columns(std::move(predictors), x, std::move(y), std::move(subgroups)),
                          std::move(rejected), std::move(warnings)};
}

// ---------------------------------------------------------------------------
// Evidence summary JSON
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& pointer, const std::string& message) {
    fail(ErrorKind::validation, pointer + ": " + message);
}

const json& member(const json& obj, const std::string& key, const std::string& pointer) {
    if (!obj.is_object()) {
        schema_error(pointer, "expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        schema_error(pointer + "/" + key, "required field is missing");
    }
    return *it;
}

double number(const json& obj, const std::string& key, const std::string& pointer) {
    const json& v = member(obj, key, pointer);
    if (!v.is_number()) {
        schema_error(pointer + "/" + key, "expected a number");
    }
    return v.get<double>();
}

std::string text(const json& obj, const std::string& key, const std::string& pointer) {
    const json& v = member(obj, key, pointer);
    if (!v.is_string()) {
        schema_error(pointer + "/" + key, "expected a string");
    }
    return v.get<std::string>();
}

} // namespace

EvidenceSummary parse_evidence(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::validation, std::string("evidence summary is not valid JSON: ") + e.what());
    }

    EvidenceSummary s;
    const json& preds = member(doc, "predictors", "");
    if (!preds.is_array() || preds.empty()) {
        schema_error("/predictors", "expected a non-empty array");
    }
    for (std::size_t j = 0; j < preds.size(); ++j) {
        const std::string ptr = "/predictors/" + std::to_string(j);
        EvidencePredictor p;
        p.name = text(preds[j], "name", ptr);
        const std::string kind = text(preds[j], "kind", ptr);
        if (kind == "continuous") {
            p.kind = PredictorKind::continuous;
            p.mean = number(preds[j], "mean", ptr);
            p.sd = number(preds[j], "sd", ptr);
            if (!(p.sd > 0.0)) {
                schema_error(ptr + "/sd", "must be positive");
            }
        } else if (kind == "binary") {
            p.kind = PredictorKind::binary;
            p.proportion = number(preds[j], "proportion", ptr);
            if (!(p.proportion > 0.0 && p.proportion < 1.0)) {
                schema_error(ptr + "/proportion", "must lie strictly between 0 and 1");
            }
        } else {
            schema_error(ptr + "/kind", "must be \"continuous\" or \"binary\"");
        }
        s.predictors.push_back(p);
    }

    const json& outcome = member(doc, "outcome", "");
    s.outcome.mean = number(outcome, "mean", "/outcome");
    s.outcome.sd = number(outcome, "sd", "/outcome");
    if (!(s.outcome.sd > 0.0)) {
        schema_error("/outcome/sd", "must be positive");
    }

    const json& coefs = member(doc, "coefficients", "");
    if (!coefs.is_array()) {
        schema_error("/coefficients", "expected an array");
    }
    if (coefs.size() != s.predictors.size()) {
        schema_error("/coefficients", "expected " + std::to_string(s.predictors.size()) +
                                          " entries (one per predictor), found " + std::to_string(coefs.size()));
    }
    for (std::size_t j = 0; j < coefs.size(); ++j) {
        const std::string ptr = "/coefficients/" + std::to_string(j);
        EvidenceCoefficient c;
        c.name = text(coefs[j], "name", ptr);
        if (c.name != s.predictors[j].name) {
            schema_error(ptr + "/name", "expected '" + s.predictors[j].name + "' to match predictor order");
        }
        c.beta_uni = number(coefs[j], "beta_uni", ptr);
        c.beta_multi = number(coefs[j], "beta_multi", ptr);
        s.coefficients.push_back(c);
    }

    const json& source_n = member(doc, "source_n", "");
    if (!source_n.is_number_integer() || source_n.get<std::int64_t>() < 1) {
        schema_error("/source_n", "expected a positive integer");
    }
    s.source_n = source_n.get<std::int64_t>();

    if (auto it = doc.find("correlation"); it != doc.end()) {
        const auto p = static_cast<Eigen::Index>(s.predictors.size());
        if (!it->is_array() || static_cast<Eigen::Index>(it->size()) != p) {
            schema_error("/correlation", "expected a p x p array of arrays");
        }
        Matrix r(p, p);
        for (Eigen::Index a = 0; a < p; ++a) {
            const json& row = (*it)[static_cast<std::size_t>(a)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != p) {
                schema_error("/correlation/" + std::to_string(a), "expected an array of " + std::to_string(p));
            }
            for (Eigen::Index b = 0; b < p; ++b) {
                const json& v = row[static_cast<std::size_t>(b)];
                if (!v.is_number()) {
                    schema_error("/correlation/" + std::to_string(a) + "/" + std::to_string(b), "expected a number");
                }
                r(a, b) = v.get<double>();
            }
        }
        s.correlation = r;
    }

    s.validate();
    return s;
}

EvidenceSummary ingest_evidence(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::ingestion, "cannot open '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_evidence(buffer.str());
}

void write_cohort_csv(const Cohort& cohort, const std::string& outcome_name, std::ostream& out) {
    const auto& preds = cohort.predictors();
    for (const auto& p : preds) {
        out << p.name << ',';
    }
    out << outcome_name << '\n';
    char buf[64];
    auto put = [&](double v) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, ptr - buf);
    };
    for (std::size_t i = 0; i < cohort.rows(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < preds.size(); ++j) {
            put(cohort.design()(r, static_cast<Eigen::Index>(j + 1)));
            out << ',';
        }
        put(cohort.outcome()(r));
        out << '\n';
    }
}

} // namespace precisen
