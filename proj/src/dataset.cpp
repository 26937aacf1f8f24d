#include "ciid/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace ciid {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

constexpr const char* kMissingLevel = "missing";

}  // namespace

void DatasetSchema::validate() const {
    if (target.column.empty()) throw ConfigError("schema: target column is required");
    std::set<std::string> seen;
    for (const auto& col : columns) {
        if (col.name == target.column)
            throw ConfigError("schema: target column also listed as a feature: " + col.name);
        if (!seen.insert(col.name).second)
            throw ConfigError("schema: duplicate feature column: " + col.name);
    }
    std::set<std::string> prot;
    for (const auto& p : protected_columns) {
        if (!prot.insert(p.column).second)
            throw ConfigError("schema: duplicate protected column: " + p.column);
        if (seen.count(p.column))
            throw ConfigError("schema: protected column also listed as a feature: " + p.column);
        if (p.column == target.column)
            throw ConfigError("schema: protected column equals the target: " + p.column);
    }
}

int DatasetSchema::protected_index(const std::string& column) const {
    for (std::size_t i = 0; i < protected_columns.size(); ++i)
        if (protected_columns[i].column == column) return static_cast<int>(i);
    throw UnknownColumnError("unknown protected column: " + column);
}

bool LabeledDataset::row_is_privileged(Eigen::Index row, int protected_idx) const {
    const auto& spec = schema.protected_columns[static_cast<std::size_t>(protected_idx)];
    return protected_raw[static_cast<std::size_t>(protected_idx)][static_cast<std::size_t>(row)] ==
           spec.privileged_value;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&]() {
        record.push_back(trim(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&]() {
        end_field();
        // Swallow blank lines (a single empty field).
        if (!(record.size() == 1 && record[0].empty())) records.push_back(record);
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r': break;
            case '\n': end_record(); break;
            default:
                field.push_back(c);
                field_started = true;
                break;
        }
    }
    if (in_quotes) throw UnparsableCellError("csv: unterminated quoted field");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

namespace {

int find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

double parse_numeric_cell(const std::string& cell, std::size_t row, const std::string& column) {
    if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end) {
        std::ostringstream os;
        os << "unparsable numeric cell at data row " << row << ", column '" << column
           << "': '" << cell << "'";
        throw UnparsableCellError(os.str());
    }
    return value;
}

}  // namespace

LabeledDataset encode_dataset(const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows,
                              const DatasetSchema& schema) {
    schema.validate();

    const int target_idx = find_column(header, schema.target.column);
    if (target_idx < 0) throw MissingColumnError("missing target column: " + schema.target.column);

    std::vector<int> feature_idx;
    for (const auto& col : schema.columns) {
        const int idx = find_column(header, col.name);
        if (idx < 0) throw MissingColumnError("missing feature column: " + col.name);
        feature_idx.push_back(idx);
    }
    std::vector<int> protected_idx;
    for (const auto& p : schema.protected_columns) {
        const int idx = find_column(header, p.column);
        if (idx < 0) throw MissingColumnError("missing protected column: " + p.column);
        protected_idx.push_back(idx);
    }

    // First pass: keep rows with a target value; discover categorical levels.
    std::vector<std::size_t> kept;
    std::int64_t dropped = 0;
    std::vector<std::set<std::string>> levels(schema.columns.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != header.size()) {
            std::ostringstream os;
            os << "data row " << r + 1 << " has " << rows[r].size() << " cells, expected "
               << header.size();
            throw UnparsableCellError(os.str());
        }
        if (rows[r][static_cast<std::size_t>(target_idx)].empty()) {
            ++dropped;
            continue;
        }
        kept.push_back(r);
        for (std::size_t c = 0; c < schema.columns.size(); ++c) {
            if (schema.columns[c].kind != ColumnKind::Categorical) continue;
            const std::string& cell = rows[r][static_cast<std::size_t>(feature_idx[c])];
            levels[c].insert(cell.empty() ? kMissingLevel : cell);
        }
    }
    if (kept.empty()) throw EmptyDatasetError("dataset has no usable rows");

    LabeledDataset out;
    out.schema = schema;
    out.rows_dropped_missing_target = dropped;

    // Encoded layout: features in schema order (one-hot for categoricals,
    // levels sorted), then one privileged indicator per protected column.
    std::vector<std::map<std::string, Eigen::Index>> level_offset(schema.columns.size());
    Eigen::Index width = 0;
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
        if (schema.columns[c].kind == ColumnKind::Numeric) {
            out.columns.push_back({schema.columns[c].name, false});
            ++width;
        } else {
            for (const auto& level : levels[c]) {
                level_offset[c][level] = width++;
                out.columns.push_back({schema.columns[c].name + "=" + level, false});
            }
        }
    }
    const Eigen::Index protected_base = width;
    for (const auto& p : schema.protected_columns) {
        out.columns.push_back({p.column + "=" + p.privileged_value, true});
        ++width;
    }

    const auto n = static_cast<Eigen::Index>(kept.size());
    out.X = Matrix::Zero(n, width);
    out.y = Labels(n);
    out.protected_raw.assign(schema.protected_columns.size(),
                             std::vector<std::string>(kept.size()));

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[kept[static_cast<std::size_t>(i)]];
        Eigen::Index offset = 0;
        for (std::size_t c = 0; c < schema.columns.size(); ++c) {
            const std::string& cell = row[static_cast<std::size_t>(feature_idx[c])];
            if (schema.columns[c].kind == ColumnKind::Numeric) {
                out.X(i, offset) =
                    parse_numeric_cell(cell, kept[static_cast<std::size_t>(i)] + 1,
                                       schema.columns[c].name);
                ++offset;
            } else {
                const std::string& level = cell.empty() ? kMissingLevel : cell;
                out.X(i, level_offset[c].at(level)) = 1.0;
                offset += static_cast<Eigen::Index>(levels[c].size());
            }
        }
        for (std::size_t p = 0; p < schema.protected_columns.size(); ++p) {
            const std::string& cell = row[static_cast<std::size_t>(protected_idx[p])];
            out.protected_raw[p][static_cast<std::size_t>(i)] = cell;
            out.X(i, protected_base + static_cast<Eigen::Index>(p)) =
                cell == schema.protected_columns[p].privileged_value ? 1.0 : 0.0;
        }
        out.y[i] = row[static_cast<std::size_t>(target_idx)] == schema.target.positive_value ? 1 : 0;
    }
    return out;
}

LabeledDataset load_csv(const std::string& path, const DatasetSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open csv file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const auto records = parse_csv(buffer.str());
    if (records.empty()) throw EmptyDatasetError("csv file has no header: " + path);
    const std::vector<std::string> header = records.front();
    const std::vector<std::vector<std::string>> rows(records.begin() + 1, records.end());
    return encode_dataset(header, rows, schema);
}

LabeledDataset take_rows(const LabeledDataset& dataset, const std::vector<Eigen::Index>& rows) {
    LabeledDataset out;
    out.schema = dataset.schema;
    out.columns = dataset.columns;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.X = Matrix(n, dataset.X.cols());
    out.y = Labels(n);
    out.protected_raw.assign(dataset.protected_raw.size(), std::vector<std::string>(rows.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = rows[static_cast<std::size_t>(i)];
        out.X.row(i) = dataset.X.row(src);
        out.y[i] = dataset.y[src];
        for (std::size_t p = 0; p < dataset.protected_raw.size(); ++p)
            out.protected_raw[p][static_cast<std::size_t>(i)] =
                dataset.protected_raw[p][static_cast<std::size_t>(src)];
    }
    return out;
}

Imputer fit_imputer(const LabeledDataset& train) {
    Imputer imputer;
    imputer.fill.assign(static_cast<std::size_t>(train.X.cols()), 0.0);
    for (Eigen::Index j = 0; j < train.X.cols(); ++j) {
        std::vector<double> finite;
        for (Eigen::Index i = 0; i < train.X.rows(); ++i)
            if (std::isfinite(train.X(i, j))) finite.push_back(train.X(i, j));
        if (finite.empty()) continue;  // all-missing column imputes to 0
        std::sort(finite.begin(), finite.end());
        const std::size_t mid = finite.size() / 2;
        imputer.fill[static_cast<std::size_t>(j)] =
            finite.size() % 2 == 1 ? finite[mid] : 0.5 * (finite[mid - 1] + finite[mid]);
    }
    return imputer;
}

void apply_imputer(const Imputer& imputer, LabeledDataset& dataset) {
    if (imputer.fill.size() != static_cast<std::size_t>(dataset.X.cols()))
        throw DimensionMismatchError("imputer fitted on a different encoded layout");
    for (Eigen::Index j = 0; j < dataset.X.cols(); ++j)
        for (Eigen::Index i = 0; i < dataset.X.rows(); ++i)
            if (!std::isfinite(dataset.X(i, j)))
                dataset.X(i, j) = imputer.fill[static_cast<std::size_t>(j)];
}

Matrix feature_view(const LabeledDataset& dataset, bool include_protected) {
    if (include_protected) return dataset.X;
    std::vector<Eigen::Index> keep;
    for (std::size_t j = 0; j < dataset.columns.size(); ++j)
        if (!dataset.columns[j].is_protected) keep.push_back(static_cast<Eigen::Index>(j));
    Matrix out(dataset.X.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = dataset.X.col(keep[j]);
    return out;
}

std::uint64_t dataset_fingerprint(const LabeledDataset& dataset) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ull;
    };
    mix(static_cast<std::uint64_t>(dataset.X.rows()));
    mix(static_cast<std::uint64_t>(dataset.X.cols()));
    for (Eigen::Index i = 0; i < dataset.X.size(); ++i) {
        std::uint64_t bits;
        const double v = dataset.X.data()[i];
        std::memcpy(&bits, &v, sizeof(bits));
        mix(bits);
    }
    for (Eigen::Index i = 0; i < dataset.y.size(); ++i)
        mix(static_cast<std::uint64_t>(dataset.y[i]));
    for (const auto& col : dataset.protected_raw)
        for (const auto& value : col) {
            for (char c : value) mix(static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
            mix(0x1full);
        }
    return h;
}

}  // namespace ciid
