#pragma once

#include <deque>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace sfforce {

struct Column {
    std::string name;
    std::string unit; // "1" for dimensionless
    std::vector<double> values;
};

/// Tabular experiment output: named columns with units plus ordered
/// key/value metadata.
class ExperimentResult {
public:
    Column& add_column(std::string name, std::string unit);
    Column& add_column(std::string name, std::string unit, std::vector<double> values);

    const std::deque<Column>& columns() const { return columns_; }
    const Column& column(const std::string& name) const;
    bool has_column(const std::string& name) const;
    std::size_t rows() const;

    void set_meta(const std::string& key, std::string value);
    void set_meta(const std::string& key, double value);
    const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }
    std::string meta(const std::string& key) const;

    /// '#'-prefixed metadata lines, a name[unit] header, then rows.
    /// Numbers are written with 17 significant digits.
    void write_csv(std::ostream& os) const;

private:
    std::deque<Column> columns_; // deque keeps add_column references stable
    std::vector<std::pair<std::string, std::string>> metadata_;
};

std::string format_double(double value);

}  // namespace sfforce
