#pragma once

#include "ciid/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ciid {

enum class ColumnKind { Numeric, Categorical };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
};

struct ProtectedSpec {
    std::string column;
    std::string privileged_value;
};

struct TargetSpec {
    std::string column;
    std::string positive_value;
};

// Declares how a CSV maps onto features, the binary target, and the
// protected attributes. Feature columns exclude the target and the
// protected columns; protected columns enter the encoded matrix as a single
// 0/1 privileged indicator each (value == privileged vs. anything else), so
// they are binary after encoding by construction.
struct DatasetSchema {
    std::vector<ColumnSpec> columns;
    TargetSpec target;
    std::vector<ProtectedSpec> protected_columns;

    void validate() const;
    int protected_index(const std::string& column) const;  // UnknownColumnError
};

struct EncodedColumn {
    std::string name;
    bool is_protected = false;
};

struct LabeledDataset {
    DatasetSchema schema;
    Matrix X;  // rows x encoded columns; protected indicators appended last
    Labels y;
    std::vector<std::vector<std::string>> protected_raw;  // [protected col][row]
    std::vector<EncodedColumn> columns;
    std::int64_t rows_dropped_missing_target = 0;

    Eigen::Index rows() const { return X.rows(); }
    bool row_is_privileged(Eigen::Index row, int protected_idx) const;
};

// RFC 4180 records (quoted fields, doubled quotes, embedded separators and
// newlines); cells are whitespace-trimmed after parsing.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string csv_quote(const std::string& field);

// Categorical features are one-hot encoded over levels discovered in the
// data (an empty cell becomes the explicit "missing" level). Empty numeric
// cells become NaN and are median-imputed downstream; any other unparsable
// numeric cell raises UnparsableCellError with its row and column. Rows with
// an empty target cell are dropped and counted.
LabeledDataset encode_dataset(const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows,
                              const DatasetSchema& schema);

LabeledDataset load_csv(const std::string& path, const DatasetSchema& schema);

LabeledDataset take_rows(const LabeledDataset& dataset, const std::vector<Eigen::Index>& rows);

// Median imputation for missing numeric cells, fitted on the training split
// only and applied to every split.
struct Imputer {
    std::vector<double> fill;
};

Imputer fit_imputer(const LabeledDataset& train);
void apply_imputer(const Imputer& imputer, LabeledDataset& dataset);

// Encoded feature matrix for learners: with or without the protected
// indicator columns.
Matrix feature_view(const LabeledDataset& dataset, bool include_protected);

std::uint64_t dataset_fingerprint(const LabeledDataset& dataset);

}  // namespace ciid
