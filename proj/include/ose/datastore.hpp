#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "ose/ontology.hpp"

namespace ose {

enum class ColumnType { Id, Text, Real, Integer, Timestamp };

std::string_view to_string(ColumnType t) noexcept;

struct Column {
  std::string name;
  ColumnType type = ColumnType::Text;
  bool operator==(const Column&) const = default;
};

struct TableSchema {
  std::string name;
  std::vector<Column> columns;
  std::vector<std::string> primary_key;

  /// Index of column `name`, or -1.
  int column_index(std::string_view name) const;
  bool operator==(const TableSchema&) const = default;
};

struct RelationalSchema {
  std::vector<TableSchema> tables;

  const TableSchema* find(std::string_view name) const;
  /// Standard CREATE TABLE statements, one per table, in schema order.
  std::string ddl() const;
  bool operator==(const RelationalSchema&) const = default;
};

struct PropertyTable {
  std::string table;
  std::string subject_column;
  std::string object_column;
  bool operator==(const PropertyTable&) const = default;
};

/// Class and property correspondence to tables of a RelationalSchema.
struct Mapping {
  std::map<std::string, std::string> class_map;
  std::map<std::string, PropertyTable> object_property_map;
  std::map<std::string, PropertyTable> data_property_map;
  bool operator==(const Mapping&) const = default;
};

/// Column typing for data-property value columns; unlisted properties map to text.
struct SchemaOptions {
  std::map<std::string, ColumnType> value_types;
};

/// One unary table per class (`id`), one binary table per object property
/// (`s`, `o`) and per data property (`s`, `v`). Table names are the
/// lowercased vocabulary name; SQL keywords get a `_t` suffix and clashes a
/// numeric suffix, so the mapping stays injective.
std::pair<RelationalSchema, Mapping> generate_schema(const Ontology& o,
                                                     const SchemaOptions& options = {});

using Value = std::variant<std::int64_t, double, std::string>;
using Row = std::vector<Value>;

/// Canonical text of a value: integers in decimal, reals in shortest
/// round-trip form, strings verbatim.
std::string render(const Value& v);

/// Unordered set of constant tuples.
struct ResultSet {
  std::size_t arity = 0;
  std::set<std::vector<std::string>> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  bool operator==(const ResultSet&) const = default;
};

struct SqlText {
  static constexpr std::string_view kDialect = "ose-min-1";
  std::string text;
};

struct RetentionPolicy {
  std::int64_t window = 0;  // seconds
  std::set<std::string> scope;
};

/// In-memory relational store. Set semantics per primary key.
///
/// Concurrency: single writer, many readers. insert/ingest/import/retention
/// take the store lock exclusively; execute and the read accessors share it.
class DataStore {
 public:
  DataStore();
  explicit DataStore(RelationalSchema schema, Mapping mapping = {});
  ~DataStore();
  DataStore(DataStore&&) noexcept;
  DataStore& operator=(DataStore&&) noexcept;

  const RelationalSchema& schema() const { return schema_; }
  const Mapping& mapping() const { return mapping_; }

  /// Inserts one row; returns 1, or 0 when the primary key is already present.
  std::size_t insert(std::string_view table, Row row);

  /// Stores raw assertions through the mapping. Throws UnmappedSymbol.
  std::size_t ingest(std::span<const Assertion> assertions);

  ResultSet execute(const SqlText& sql) const;
  ResultSet execute(std::string_view sql) const;

  /// Deletes rows of scoped timestamped tables older than now - window and
  /// cascades the deleted ids into the other scoped tables.
  std::size_t apply_retention(const RetentionPolicy& policy, std::int64_t now);

  /// Reconstructs the stored assertions from the mapped tables.
  std::vector<Assertion> read_back() const;

  std::size_t row_count(std::string_view table) const;
  std::vector<Row> rows(std::string_view table) const;

  /// CSV with a header row; timestamp columns as ISO-8601 UTC.
  void export_csv(std::string_view table, std::ostream& out) const;
  std::size_t import_csv(std::string_view table, std::istream& in);

  struct Table;

 private:
  Table& table(std::string_view name);
  const Table& table(std::string_view name) const;
  std::size_t insert_locked(Table& t, Row row);

  RelationalSchema schema_;
  Mapping mapping_;
  std::unordered_map<std::string, std::unique_ptr<Table>> tables_;
  std::unique_ptr<std::shared_mutex> mutex_;
};

/// Converts `text` to a value of column type `t`. Throws InvalidParams on a
/// malformed number or timestamp.
Value parse_value(ColumnType t, std::string_view text);

}  // namespace ose
