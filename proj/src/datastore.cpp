#include "ose/datastore.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <mutex>
#include <ostream>
#include <unordered_set>

#include "ose/error.hpp"
#include "ose/sql.hpp"
#include "ose/text.hpp"

namespace ose {

std::string_view to_string(ColumnType t) noexcept {
  switch (t) {
    case ColumnType::Id: return "id";
    case ColumnType::Text: return "text";
    case ColumnType::Real: return "real";
    case ColumnType::Integer: return "integer";
    case ColumnType::Timestamp: return "timestamp";
  }
  return "text";
}

int TableSchema::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const TableSchema* RelationalSchema::find(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

namespace {

std::string_view sql_type(ColumnType t) {
  switch (t) {
    case ColumnType::Id:
    case ColumnType::Text: return "TEXT";
    case ColumnType::Real: return "DOUBLE PRECISION";
    case ColumnType::Integer: return "BIGINT";
    case ColumnType::Timestamp: return "BIGINT";
  }
  return "TEXT";
}

}  // namespace

std::string RelationalSchema::ddl() const {
  std::string out;
  for (const auto& t : tables) {
    out += "CREATE TABLE " + t.name + " (\n";
    for (const auto& c : t.columns) {
      out += "  " + c.name + " " + std::string(sql_type(c.type)) + " NOT NULL,";
      if (c.type == ColumnType::Timestamp) out += "  -- epoch seconds";
      out += "\n";
    }
    out += "  PRIMARY KEY (";
    for (std::size_t i = 0; i < t.primary_key.size(); ++i) {
      if (i > 0) out += ", ";
      out += t.primary_key[i];
    }
    out += ")\n);\n";
  }
  return out;
}

std::pair<RelationalSchema, Mapping> generate_schema(const Ontology& o,
                                                     const SchemaOptions& options) {
  static const std::set<std::string> kKeywords = {
      "all",   "and",   "as",     "by",    "create", "delete", "distinct", "from",
      "group", "having", "inner", "insert", "join",  "left",   "limit",    "not",
      "on",    "or",    "order",  "outer", "select", "table",  "union",    "update",
      "where", "count", "sum",    "min",   "max"};
  RelationalSchema schema;
  Mapping mapping;
  std::set<std::string> used;
  auto table_name = [&](const std::string& vocab) {
    std::string base = text::lowercase(vocab);
    for (char& c : base) {
      if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    }
    if (base.empty() || std::isdigit(static_cast<unsigned char>(base[0]))) base = "t_" + base;
    if (kKeywords.contains(base)) base += "_t";
    std::string name = base;
    for (int k = 2; used.contains(name); ++k) name = base + "_" + std::to_string(k);
    used.insert(name);
    return name;
  };

  for (const auto& c : o.classes) {
    const std::string t = table_name(c);
    schema.tables.push_back({t, {{"id", ColumnType::Id}}, {"id"}});
    mapping.class_map[c] = t;
  }
  for (const auto& p : o.object_properties) {
    const std::string t = table_name(p);
    schema.tables.push_back({t, {{"s", ColumnType::Id}, {"o", ColumnType::Id}}, {"s", "o"}});
    mapping.object_property_map[p] = {t, "s", "o"};
  }
  for (const auto& p : o.data_properties) {
    const std::string t = table_name(p);
    auto it = options.value_types.find(p);
    const ColumnType vt = it == options.value_types.end() ? ColumnType::Text : it->second;
    schema.tables.push_back({t, {{"s", ColumnType::Id}, {"v", vt}}, {"s", "v"}});
    mapping.data_property_map[p] = {t, "s", "v"};
  }
  return {std::move(schema), std::move(mapping)};
}

std::string render(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, *d);
    return std::string(buf, p);
  }
  return std::get<std::string>(v);
}

Value parse_value(ColumnType t, std::string_view s) {
  switch (t) {
    case ColumnType::Id:
    case ColumnType::Text: return std::string(s);
    case ColumnType::Timestamp: return text::parse_iso8601(s);
    case ColumnType::Integer: {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw Error(ErrorCode::InvalidParams, "not an integer: '" + std::string(s) + "'");
      }
      return v;
    }
    case ColumnType::Real: {
      double v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw Error(ErrorCode::InvalidParams, "not a number: '" + std::string(s) + "'");
      }
      return v;
    }
  }
  return std::string(s);
}

struct DataStore::Table {
  TableSchema schema;
  std::vector<Row> rows;
  std::unordered_set<std::string> keys;
  std::vector<int> key_columns;

  std::string key_of(const Row& r) const {
    std::string k;
    for (int c : key_columns) {
      k += render(r[c]);
      k.push_back('\x1f');
    }
    return k;
  }
};

DataStore::DataStore() : mutex_(std::make_unique<std::shared_mutex>()) {}

DataStore::DataStore(RelationalSchema schema, Mapping mapping)
    : schema_(std::move(schema)),
      mapping_(std::move(mapping)),
      mutex_(std::make_unique<std::shared_mutex>()) {
  for (const auto& ts : schema_.tables) {
    auto t = std::make_unique<Table>();
    t->schema = ts;
    for (const auto& k : ts.primary_key) t->key_columns.push_back(ts.column_index(k));
    if (t->key_columns.empty()) {
      for (std::size_t i = 0; i < ts.columns.size(); ++i) t->key_columns.push_back(static_cast<int>(i));
    }
    tables_.emplace(ts.name, std::move(t));
  }
}

DataStore::~DataStore() = default;
DataStore::DataStore(DataStore&&) noexcept = default;
DataStore& DataStore::operator=(DataStore&&) noexcept = default;

DataStore::Table& DataStore::table(std::string_view name) {
  auto it = tables_.find(std::string(name));
  if (it == tables_.end()) throw Error(ErrorCode::UnknownTable, "unknown table '" + std::string(name) + "'");
  return *it->second;
}

const DataStore::Table& DataStore::table(std::string_view name) const {
  auto it = tables_.find(std::string(name));
  if (it == tables_.end()) throw Error(ErrorCode::UnknownTable, "unknown table '" + std::string(name) + "'");
  return *it->second;
}

std::size_t DataStore::insert_locked(Table& t, Row row) {
  if (row.size() != t.schema.columns.size()) {
    throw Error(ErrorCode::InvalidParams, "row arity mismatch for table '" + t.schema.name + "'");
  }
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (auto* s = std::get_if<std::string>(&row[i]); s != nullptr) {
      const ColumnType ct = t.schema.columns[i].type;
      if (ct != ColumnType::Id && ct != ColumnType::Text) row[i] = parse_value(ct, *s);
    }
  }
  if (!t.keys.insert(t.key_of(row)).second) return 0;
  t.rows.push_back(std::move(row));
  return 1;
}

std::size_t DataStore::insert(std::string_view name, Row row) {
  std::unique_lock lock(*mutex_);
  return insert_locked(table(name), std::move(row));
}

std::size_t DataStore::ingest(std::span<const Assertion> assertions) {
  std::unique_lock lock(*mutex_);
  std::size_t inserted = 0;
  for (const auto& a : assertions) {
    if (const auto* ca = std::get_if<ClassAssertion>(&a)) {
      auto it = mapping_.class_map.find(ca->cls);
      if (it == mapping_.class_map.end()) {
        throw Error(ErrorCode::UnmappedSymbol, "class '" + ca->cls + "' is not mapped");
      }
      inserted += insert_locked(table(it->second), Row{ca->individual});
    } else if (const auto* oa = std::get_if<ObjectAssertion>(&a)) {
      auto it = mapping_.object_property_map.find(oa->property);
      if (it == mapping_.object_property_map.end()) {
        throw Error(ErrorCode::UnmappedSymbol, "property '" + oa->property + "' is not mapped");
      }
      inserted += insert_locked(table(it->second.table), Row{oa->subject, oa->object});
    } else if (const auto* da = std::get_if<DataAssertion>(&a)) {
      auto it = mapping_.data_property_map.find(da->property);
      if (it == mapping_.data_property_map.end()) {
        throw Error(ErrorCode::UnmappedSymbol, "property '" + da->property + "' is not mapped");
      }
      inserted += insert_locked(table(it->second.table), Row{da->subject, da->value});
    }
  }
  return inserted;
}

namespace {

bool is_numeric(const Value& v) { return !std::holds_alternative<std::string>(v); }

double as_double(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

int compare(const Value& a, const Value& b) {
  if (is_numeric(a) && is_numeric(b)) {
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
      const auto x = std::get<std::int64_t>(a);
      const auto y = std::get<std::int64_t>(b);
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    const double x = as_double(a);
    const double y = as_double(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (!is_numeric(a) && !is_numeric(b)) {
    return std::get<std::string>(a).compare(std::get<std::string>(b)) < 0
               ? -1
               : (std::get<std::string>(a) == std::get<std::string>(b) ? 0 : 1);
  }
  const std::string x = render(a);
  const std::string y = render(b);
  return x < y ? -1 : (x == y ? 0 : 1);
}

bool holds(sql::CmpOp op, int c) {
  switch (op) {
    case sql::CmpOp::Eq: return c == 0;
    case sql::CmpOp::Ne: return c != 0;
    case sql::CmpOp::Lt: return c < 0;
    case sql::CmpOp::Le: return c <= 0;
    case sql::CmpOp::Gt: return c > 0;
    case sql::CmpOp::Ge: return c >= 0;
  }
  return false;
}

// A column reference resolved against the FROM list.
struct Slot {
  int alias = -1;
  int column = -1;
};

// Operand after resolution: either a slot or a constant.
struct Resolved {
  bool is_slot = false;
  Slot slot;
  Value constant;
};

struct CompiledCondition {
  Resolved lhs;
  sql::CmpOp op;
  Resolved rhs;
  int last_alias = -1;  // highest alias index referenced
};

}  // namespace

ResultSet DataStore::execute(const SqlText& sql) const { return execute(sql.text); }

ResultSet DataStore::execute(std::string_view text) const {
  const sql::Query q = sql::parse(text);
  std::shared_lock lock(*mutex_);

  ResultSet result;
  result.arity = q.blocks.front().items.size();
  const bool aggregate = std::any_of(q.blocks.front().items.begin(), q.blocks.front().items.end(),
                                     [](const auto& it) { return it.aggregate != sql::Aggregate::None; });

  for (const auto& block : q.blocks) {
    if (block.items.size() != result.arity) {
      throw Error(ErrorCode::DialectViolation, "UNION blocks differ in arity");
    }
    const bool block_agg = std::any_of(block.items.begin(), block.items.end(), [](const auto& it) {
      return it.aggregate != sql::Aggregate::None;
    });
    if (block_agg != aggregate ||
        (block_agg && !std::all_of(block.items.begin(), block.items.end(), [](const auto& it) {
          return it.aggregate != sql::Aggregate::None;
        }))) {
      throw Error(ErrorCode::DialectViolation, "aggregates cannot be mixed with plain columns");
    }
    if (aggregate && q.blocks.size() > 1) {
      throw Error(ErrorCode::DialectViolation, "aggregates cannot be combined with UNION");
    }

    std::vector<const Table*> tabs;
    for (const auto& ref : block.from) tabs.push_back(&table(ref.table));

    auto resolve_ref = [&](const sql::ColumnRef& ref) {
      Slot s;
      for (std::size_t i = 0; i < block.from.size(); ++i) {
        if (!ref.alias.empty() && block.from[i].alias != ref.alias) continue;
        const int c = tabs[i]->schema.column_index(ref.column);
        if (c < 0) {
          if (!ref.alias.empty()) {
            throw Error(ErrorCode::UnknownColumn,
                        "unknown column '" + ref.alias + "." + ref.column + "'");
          }
          continue;
        }
        if (s.alias >= 0) {
          throw Error(ErrorCode::DialectViolation, "ambiguous column '" + ref.column + "'");
        }
        s = {static_cast<int>(i), c};
      }
      if (s.alias < 0) {
        const bool alias_known = ref.alias.empty() ||
            std::any_of(block.from.begin(), block.from.end(),
                        [&](const auto& f) { return f.alias == ref.alias; });
        if (!alias_known) throw Error(ErrorCode::UnknownTable, "unknown alias '" + ref.alias + "'");
        throw Error(ErrorCode::UnknownColumn, "unknown column '" + ref.column + "'");
      }
      return s;
    };
    auto resolve = [&](const sql::Operand& op) {
      Resolved r;
      if (const auto* ref = std::get_if<sql::ColumnRef>(&op)) {
        r.is_slot = true;
        r.slot = resolve_ref(*ref);
      } else {
        r.constant = std::get<sql::Literal>(op).value;
      }
      return r;
    };

    std::vector<CompiledCondition> conds;
    for (const auto& c : block.where) {
      CompiledCondition cc{resolve(c.lhs), c.op, resolve(c.rhs), -1};
      if (cc.lhs.is_slot) cc.last_alias = std::max(cc.last_alias, cc.lhs.slot.alias);
      if (cc.rhs.is_slot) cc.last_alias = std::max(cc.last_alias, cc.rhs.slot.alias);
      conds.push_back(std::move(cc));
    }
    std::vector<Resolved> items;
    for (const auto& it : block.items) {
      if (it.aggregate == sql::Aggregate::CountStar) {
        items.push_back({});
      } else {
        items.push_back(resolve(it.operand));
      }
    }

    const std::size_t n = block.from.size();
    using Tuple = std::vector<const Row*>;
    auto value_of = [](const Tuple& t, const Resolved& r) -> const Value& {
      return r.is_slot ? (*t[r.slot.alias])[r.slot.column] : r.constant;
    };

    std::vector<Tuple> tuples{Tuple{}};
    std::vector<bool> used(conds.size(), false);
    for (std::size_t a = 0; a < n; ++a) {
      // Rows of alias a passing the conditions that mention only alias a.
      std::vector<const Row*> cand;
      std::vector<std::size_t> local;
      for (std::size_t k = 0; k < conds.size(); ++k) {
        const auto& c = conds[k];
        const bool only_a = (!c.lhs.is_slot || c.lhs.slot.alias == static_cast<int>(a)) &&
                            (!c.rhs.is_slot || c.rhs.slot.alias == static_cast<int>(a)) &&
                            c.last_alias == static_cast<int>(a);
        if (only_a) {
          local.push_back(k);
          used[k] = true;
        }
      }
      for (const Row& r : tabs[a]->rows) {
        bool ok = true;
        for (std::size_t k : local) {
          const auto& c = conds[k];
          const Value& l = c.lhs.is_slot ? r[c.lhs.slot.column] : c.lhs.constant;
          const Value& rv = c.rhs.is_slot ? r[c.rhs.slot.column] : c.rhs.constant;
          if (!holds(c.op, compare(l, rv))) {
            ok = false;
            break;
          }
        }
        if (ok) cand.push_back(&r);
      }

      // Equality with an already bound alias drives a hash join.
      int join = -1;
      for (std::size_t k = 0; k < conds.size() && join < 0; ++k) {
        const auto& c = conds[k];
        if (used[k] || c.op != sql::CmpOp::Eq || !c.lhs.is_slot || !c.rhs.is_slot) continue;
        const bool l_here = c.lhs.slot.alias == static_cast<int>(a) && c.rhs.slot.alias < static_cast<int>(a);
        const bool r_here = c.rhs.slot.alias == static_cast<int>(a) && c.lhs.slot.alias < static_cast<int>(a);
        if (l_here || r_here) join = static_cast<int>(k);
      }

      std::vector<Tuple> next;
      if (join >= 0) {
        used[join] = true;
        const auto& c = conds[join];
        const Slot here = c.lhs.slot.alias == static_cast<int>(a) ? c.lhs.slot : c.rhs.slot;
        const Resolved there = c.lhs.slot.alias == static_cast<int>(a) ? c.rhs : c.lhs;
        std::unordered_multimap<std::string, const Row*> index;
        index.reserve(cand.size());
        for (const Row* r : cand) index.emplace(render((*r)[here.column]), r);
        for (const Tuple& t : tuples) {
          auto [lo, hi] = index.equal_range(render(value_of(t, there)));
          for (auto it = lo; it != hi; ++it) {
            Tuple nt = t;
            nt.push_back(it->second);
            next.push_back(std::move(nt));
          }
        }
      } else {
        next.reserve(tuples.size() * cand.size());
        for (const Tuple& t : tuples) {
          for (const Row* r : cand) {
            Tuple nt = t;
            nt.push_back(r);
            next.push_back(std::move(nt));
          }
        }
      }

      // Remaining conditions that became fully bound.
      std::vector<std::size_t> ready;
      for (std::size_t k = 0; k < conds.size(); ++k) {
        if (!used[k] && conds[k].last_alias <= static_cast<int>(a)) {
          ready.push_back(k);
          used[k] = true;
        }
      }
      if (!ready.empty()) {
        std::erase_if(next, [&](const Tuple& t) {
          for (std::size_t k : ready) {
            const auto& c = conds[k];
            if (!holds(c.op, compare(value_of(t, c.lhs), value_of(t, c.rhs)))) return true;
          }
          return false;
        });
      }
      tuples = std::move(next);
      if (tuples.empty()) break;
    }

    if (aggregate) {
      std::vector<std::string> row;
      for (std::size_t i = 0; i < block.items.size(); ++i) {
        const auto agg = block.items[i].aggregate;
        if (agg == sql::Aggregate::CountStar) {
          row.push_back(std::to_string(tuples.size()));
          continue;
        }
        if (agg == sql::Aggregate::CountDistinct) {
          std::unordered_set<std::string> seen;
          for (const auto& t : tuples) seen.insert(render(value_of(t, items[i])));
          row.push_back(std::to_string(seen.size()));
          continue;
        }
        if (tuples.empty()) {
          row.emplace_back();
          continue;
        }
        if (agg == sql::Aggregate::Sum) {
          bool all_int = true;
          std::int64_t isum = 0;
          double dsum = 0;
          for (const auto& t : tuples) {
            const Value& v = value_of(t, items[i]);
            if (!is_numeric(v)) throw Error(ErrorCode::DialectViolation, "SUM over text column");
            if (const auto* iv = std::get_if<std::int64_t>(&v)) {
              isum += *iv;
            } else {
              all_int = false;
            }
            dsum += as_double(v);
          }
          row.push_back(all_int ? std::to_string(isum) : render(Value{dsum}));
        } else {
          const Value* best = nullptr;
          for (const auto& t : tuples) {
            const Value& v = value_of(t, items[i]);
            if (best == nullptr) {
              best = &v;
            } else {
              const int c = compare(v, *best);
              if ((agg == sql::Aggregate::Min && c < 0) || (agg == sql::Aggregate::Max && c > 0)) best = &v;
            }
          }
          row.push_back(render(*best));
        }
      }
      result.rows.insert(std::move(row));
      continue;
    }

    for (const auto& t : tuples) {
      std::vector<std::string> row;
      row.reserve(items.size());
      for (const auto& it : items) row.push_back(render(value_of(t, it)));
      result.rows.insert(std::move(row));
    }
  }
  return result;
}

std::size_t DataStore::apply_retention(const RetentionPolicy& policy, std::int64_t now) {
  if (policy.window <= 0) throw Error(ErrorCode::InvalidParams, "retention window must be positive");
  std::unique_lock lock(*mutex_);
  const std::int64_t cutoff = now - policy.window;

  std::vector<Table*> timed;
  std::vector<Table*> others;
  for (const auto& name : policy.scope) {
    Table& t = table(name);
    const bool has_ts = std::any_of(t.schema.columns.begin(), t.schema.columns.end(),
                                    [](const Column& c) { return c.type == ColumnType::Timestamp; });
    (has_ts ? timed : others).push_back(&t);
  }
  if (timed.empty()) {
    throw Error(ErrorCode::MissingTimestampColumn, "no scoped table carries a timestamp column");
  }

  std::size_t deleted = 0;
  std::unordered_set<std::string> gone;
  auto rebuild_keys = [](Table& t) {
    t.keys.clear();
    for (const Row& r : t.rows) t.keys.insert(t.key_of(r));
  };
  for (Table* t : timed) {
    const auto& cols = t->schema.columns;
    const std::size_t before = t->rows.size();
    std::erase_if(t->rows, [&](const Row& r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c].type == ColumnType::Timestamp && compare(r[c], Value{cutoff}) < 0) {
          gone.insert(render(r[0]));
          return true;
        }
      }
      return false;
    });
    deleted += before - t->rows.size();
    rebuild_keys(*t);
  }
  // Cascade: drop rows of the other scoped tables that reference a deleted id.
  for (Table* t : others) {
    const auto& cols = t->schema.columns;
    const std::size_t before = t->rows.size();
    std::erase_if(t->rows, [&](const Row& r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c].type == ColumnType::Id && gone.contains(render(r[c]))) return true;
      }
      return false;
    });
    deleted += before - t->rows.size();
    rebuild_keys(*t);
  }
  return deleted;
}

std::vector<Assertion> DataStore::read_back() const {
  std::shared_lock lock(*mutex_);
  std::vector<Assertion> out;
  for (const auto& [cls, tname] : mapping_.class_map) {
    for (const Row& r : table(tname).rows) out.emplace_back(ClassAssertion{render(r[0]), cls});
  }
  for (const auto& [p, pt] : mapping_.object_property_map) {
    const Table& t = table(pt.table);
    const int s = t.schema.column_index(pt.subject_column);
    const int o = t.schema.column_index(pt.object_column);
    for (const Row& r : t.rows) out.emplace_back(ObjectAssertion{render(r[s]), p, render(r[o])});
  }
  for (const auto& [p, pt] : mapping_.data_property_map) {
    const Table& t = table(pt.table);
    const int s = t.schema.column_index(pt.subject_column);
    const int v = t.schema.column_index(pt.object_column);
    for (const Row& r : t.rows) out.emplace_back(DataAssertion{render(r[s]), p, render(r[v])});
  }
  return out;
}

std::size_t DataStore::row_count(std::string_view name) const {
  std::shared_lock lock(*mutex_);
  return table(name).rows.size();
}

std::vector<Row> DataStore::rows(std::string_view name) const {
  std::shared_lock lock(*mutex_);
  return table(name).rows;
}

void DataStore::export_csv(std::string_view name, std::ostream& out) const {
  std::shared_lock lock(*mutex_);
  const Table& t = table(name);
  std::vector<std::string> header;
  for (const auto& c : t.schema.columns) header.push_back(c.name);
  out << text::join_csv(header) << "\n";
  for (const Row& r : t.rows) {
    std::vector<std::string> fields;
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (t.schema.columns[c].type == ColumnType::Timestamp && std::holds_alternative<std::int64_t>(r[c])) {
        fields.push_back(text::format_iso8601(std::get<std::int64_t>(r[c])));
      } else {
        fields.push_back(render(r[c]));
      }
    }
    out << text::join_csv(fields) << "\n";
  }
}

std::size_t DataStore::import_csv(std::string_view name, std::istream& in) {
  std::unique_lock lock(*mutex_);
  Table& t = table(name);
  std::string line;
  if (!std::getline(in, line)) return 0;
  const auto header = text::split_csv(line);
  std::vector<int> order;
  for (const auto& h : header) {
    const int c = t.schema.column_index(h);
    if (c < 0) throw Error(ErrorCode::UnknownColumn, "unknown column '" + h + "' in CSV header");
    order.push_back(c);
  }
  if (order.size() != t.schema.columns.size()) {
    throw Error(ErrorCode::InvalidParams, "CSV header does not cover every column of '" + t.schema.name + "'");
  }
  std::size_t inserted = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = text::split_csv(line);
    if (fields.size() != order.size()) throw Error(ErrorCode::InvalidParams, "CSV row arity mismatch");
    Row r(order.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      r[order[i]] = parse_value(t.schema.columns[order[i]].type, fields[i]);
    }
    inserted += insert_locked(t, std::move(r));
  }
  return inserted;
}

}  // namespace ose
