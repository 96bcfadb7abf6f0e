#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ose/datastore.hpp"

// AST of the SQL subset the bundled executor runs:
//
//   query  := block (UNION block)*
//   block  := SELECT [DISTINCT] item (, item)* FROM table [alias] (, table [alias])*
//             [WHERE cond (AND cond)*]
//   item   := ref | literal | COUNT(*) | COUNT(DISTINCT ref) | SUM(ref) | MIN(ref) | MAX(ref)
//   cond   := operand (= | <> | < | <= | > | >=) operand
//
// Rewriting output only uses SELECT DISTINCT, `=` and UNION; comparisons and
// aggregates serve the native KPI queries. Anything else is a DialectViolation.
namespace ose::sql {

struct ColumnRef {
  std::string alias;  // empty when unqualified
  std::string column;
};

struct Literal {
  Value value;
};

using Operand = std::variant<ColumnRef, Literal>;

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Condition {
  Operand lhs;
  CmpOp op = CmpOp::Eq;
  Operand rhs;
};

enum class Aggregate { None, CountStar, CountDistinct, Sum, Min, Max };

struct SelectItem {
  Aggregate aggregate = Aggregate::None;
  Operand operand;
};

struct TableRef {
  std::string table;
  std::string alias;
};

struct SelectBlock {
  bool distinct = false;
  std::vector<SelectItem> items;
  std::vector<TableRef> from;
  std::vector<Condition> where;
};

struct Query {
  std::vector<SelectBlock> blocks;
};

/// Throws Error(DialectViolation) on anything outside the grammar above.
Query parse(std::string_view text);

/// Single-quoted SQL string literal.
std::string quote(std::string_view s);

}  // namespace ose::sql
