#pragma once

#include "ciid/dataset.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ciid {

// Bit-per-column group id: bit is 0 when the column holds its privileged
// value, 1 otherwise. The leftmost spec column is the most significant bit,
// so ascending keys enumerate priv..priv first and dis..dis last.
using GroupKey = std::uint32_t;

// Declarative priv/dis partition over one or more protected columns. A
// two-column spec yields four intersectional groups.
struct GroupSpec {
    std::vector<std::string> protected_columns;
    std::vector<std::string> privileged_values;

    std::string name() const;  // "sex_race"
    std::size_t column_count() const { return protected_columns.size(); }
    std::uint32_t group_count() const { return 1u << protected_columns.size(); }
    void validate(const DatasetSchema& schema) const;  // UnknownColumnError
};

// Builds a spec over the named columns, pulling privileged values from the
// schema.
GroupSpec make_group_spec(const DatasetSchema& schema, const std::vector<std::string>& columns);

GroupKey row_group_key(const LabeledDataset& dataset, const GroupSpec& spec, Eigen::Index row);

// "sex_race_priv_dis" style intersectional name; "sex_priv" for marginals.
std::string subgroup_name(const GroupSpec& spec, GroupKey key);
std::string marginal_name(const std::string& column, bool privileged);

// Row indices per group key, in dataset order; every key is present, empty
// groups map to empty lists.
std::map<GroupKey, std::vector<Eigen::Index>> group_rows(const LabeledDataset& dataset,
                                                         const GroupSpec& spec);

// Disjoint order-preserving subsets whose union is the input.
std::map<GroupKey, LabeledDataset> partition_by_group(const LabeledDataset& dataset,
                                                      const GroupSpec& spec);

}  // namespace ciid
