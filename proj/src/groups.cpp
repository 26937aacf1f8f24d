#include "ciid/groups.hpp"

namespace ciid {

std::string GroupSpec::name() const {
    std::string out;
    for (std::size_t i = 0; i < protected_columns.size(); ++i) {
        if (i > 0) out += "_";
        out += protected_columns[i];
    }
    return out;
}

void GroupSpec::validate(const DatasetSchema& schema) const {
    if (protected_columns.empty()) throw ConfigError("group spec has no columns");
    if (protected_columns.size() != privileged_values.size())
        throw ConfigError("group spec: columns and privileged values differ in length");
    if (protected_columns.size() > 16) throw ConfigError("group spec: too many columns");
    for (const auto& col : protected_columns) schema.protected_index(col);
}

GroupSpec make_group_spec(const DatasetSchema& schema, const std::vector<std::string>& columns) {
    GroupSpec spec;
    spec.protected_columns = columns;
    for (const auto& col : columns) {
        const int idx = schema.protected_index(col);
        spec.privileged_values.push_back(
            schema.protected_columns[static_cast<std::size_t>(idx)].privileged_value);
    }
    return spec;
}

GroupKey row_group_key(const LabeledDataset& dataset, const GroupSpec& spec, Eigen::Index row) {
    GroupKey key = 0;
    const std::size_t c = spec.protected_columns.size();
    for (std::size_t i = 0; i < c; ++i) {
        const int idx = dataset.schema.protected_index(spec.protected_columns[i]);
        const auto& value = dataset.protected_raw[static_cast<std::size_t>(idx)]
                                                 [static_cast<std::size_t>(row)];
        const bool privileged = value == spec.privileged_values[i];
        if (!privileged) key |= 1u << (c - 1 - i);
    }
    return key;
}

std::string subgroup_name(const GroupSpec& spec, GroupKey key) {
    std::string out = spec.name();
    const std::size_t c = spec.protected_columns.size();
    for (std::size_t i = 0; i < c; ++i) {
        const bool dis = (key >> (c - 1 - i)) & 1u;
        out += dis ? "_dis" : "_priv";
    }
    return out;
}

std::string marginal_name(const std::string& column, bool privileged) {
    return column + (privileged ? "_priv" : "_dis");
}

std::map<GroupKey, std::vector<Eigen::Index>> group_rows(const LabeledDataset& dataset,
                                                         const GroupSpec& spec) {
    spec.validate(dataset.schema);
    std::map<GroupKey, std::vector<Eigen::Index>> out;
    for (GroupKey key = 0; key < spec.group_count(); ++key) out[key] = {};
    for (Eigen::Index row = 0; row < dataset.rows(); ++row)
        out[row_group_key(dataset, spec, row)].push_back(row);
    return out;
}

std::map<GroupKey, LabeledDataset> partition_by_group(const LabeledDataset& dataset,
                                                      const GroupSpec& spec) {
    std::map<GroupKey, LabeledDataset> out;
    for (const auto& [key, rows] : group_rows(dataset, spec)) out[key] = take_rows(dataset, rows);
    return out;
}

}  // namespace ciid
