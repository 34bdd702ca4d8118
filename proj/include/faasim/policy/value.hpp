#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace faasim::policy {

class Value;

using ValueList = std::vector<Value>;
using ValueRecord = std::map<std::string, Value>;

enum class ValueType { unit, number, boolean, string, list, record };

const char* to_string(ValueType t);

// Policy-language value. Numbers are 64-bit floats (exact integers up to
// 2^53). Lists and records have reference semantics; cycle creation is
// rejected at mutation time, so every reachable structure is a finite tree.
class Value {
 public:
  Value() : data_(std::monostate{}) {}

  static Value number(double v) { return Value(v); }
  static Value boolean(bool v) { return Value(v); }
  static Value string(std::string v) { return Value(std::move(v)); }
  static Value list() { return Value(std::make_shared<ValueList>()); }
  static Value list(ValueList items) { return Value(std::make_shared<ValueList>(std::move(items))); }
  static Value record() { return Value(std::make_shared<ValueRecord>()); }
  static Value record(ValueRecord fields) {
    return Value(std::make_shared<ValueRecord>(std::move(fields)));
  }

  ValueType type() const;

  bool is_unit() const { return std::holds_alternative<std::monostate>(data_); }
  bool is_number() const { return std::holds_alternative<double>(data_); }
  bool is_boolean() const { return std::holds_alternative<bool>(data_); }
  bool is_string() const { return std::holds_alternative<std::string>(data_); }
  bool is_list() const { return std::holds_alternative<std::shared_ptr<ValueList>>(data_); }
  bool is_record() const { return std::holds_alternative<std::shared_ptr<ValueRecord>>(data_); }

  double as_number() const { return std::get<double>(data_); }
  bool as_boolean() const { return std::get<bool>(data_); }
  const std::string& as_string() const { return std::get<std::string>(data_); }
  ValueList& as_list() { return *std::get<std::shared_ptr<ValueList>>(data_); }
  const ValueList& as_list() const { return *std::get<std::shared_ptr<ValueList>>(data_); }
  ValueRecord& as_record() { return *std::get<std::shared_ptr<ValueRecord>>(data_); }
  const ValueRecord& as_record() const { return *std::get<std::shared_ptr<ValueRecord>>(data_); }

  // Identity of the underlying container, for cycle checks.
  const void* container_id() const;

  // Structural equality; requires both sides to have the same type.
  friend bool deep_equal(const Value& a, const Value& b);

  // True if `container` is reachable from `v` (including v itself).
  friend bool reaches(const Value& v, const void* container);

  // Rendering used by diagnostics and state dumps.
  std::string repr() const;

 private:
  explicit Value(double v) : data_(v) {}
  explicit Value(bool v) : data_(v) {}
  explicit Value(std::string v) : data_(std::move(v)) {}
  explicit Value(std::shared_ptr<ValueList> v) : data_(std::move(v)) {}
  explicit Value(std::shared_ptr<ValueRecord> v) : data_(std::move(v)) {}

  std::variant<std::monostate, double, bool, std::string, std::shared_ptr<ValueList>,
               std::shared_ptr<ValueRecord>>
      data_;
};

}  // namespace faasim::policy
