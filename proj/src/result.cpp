#include "sfforce/result.hpp"

#include "sfforce/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace sfforce {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

Column& ExperimentResult::add_column(std::string name, std::string unit) {
    return add_column(std::move(name), std::move(unit), {});
}

Column& ExperimentResult::add_column(std::string name, std::string unit, std::vector<double> values) {
    if (unit.empty()) throw ArgumentError("column '" + name + "' needs a unit string");
    if (has_column(name)) throw ArgumentError("duplicate column '" + name + "'");
    columns_.push_back(Column{std::move(name), std::move(unit), std::move(values)});
    return columns_.back();
}

const Column& ExperimentResult::column(const std::string& name) const {
    auto it = std::find_if(columns_.begin(), columns_.end(),
                           [&](const Column& c) { return c.name == name; });
    if (it == columns_.end()) throw ArgumentError("no column named '" + name + "'");
    return *it;
}

bool ExperimentResult::has_column(const std::string& name) const {
    return std::any_of(columns_.begin(), columns_.end(),
                       [&](const Column& c) { return c.name == name; });
}

std::size_t ExperimentResult::rows() const {
    return columns_.empty() ? 0 : columns_.front().values.size();
}

void ExperimentResult::set_meta(const std::string& key, std::string value) {
    for (auto& [k, v] : metadata_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    metadata_.emplace_back(key, std::move(value));
}

void ExperimentResult::set_meta(const std::string& key, double value) {
    set_meta(key, format_double(value));
}

std::string ExperimentResult::meta(const std::string& key) const {
    for (const auto& [k, v] : metadata_) {
        if (k == key) return v;
    }
    throw ArgumentError("no metadata key '" + key + "'");
}

void ExperimentResult::write_csv(std::ostream& os) const {
    for (const auto& c : columns_) {
        if (c.values.size() != rows()) {
            throw ArgumentError("column '" + c.name + "' has a different length");
        }
    }
    for (const auto& [k, v] : metadata_) os << "# " << k << " = " << v << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) os << ',';
        os << columns_[i].name << '[' << columns_[i].unit << ']';
    }
    os << '\n';
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) os << ',';
            os << format_double(columns_[i].values[r]);
        }
        os << '\n';
    }
}

}  // namespace sfforce
