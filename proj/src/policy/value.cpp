#include <cmath>
#include <cstdio>

#include "faasim/policy/value.hpp"

namespace faasim::policy {

const char* to_string(ValueType t) {
  switch (t) {
    case ValueType::unit: return "unit";
    case ValueType::number: return "number";
    case ValueType::boolean: return "boolean";
    case ValueType::string: return "string";
    case ValueType::list: return "list";
    case ValueType::record: return "record";
  }
  return "?";
}

ValueType Value::type() const {
  if (is_unit()) return ValueType::unit;
  if (is_number()) return ValueType::number;
  if (is_boolean()) return ValueType::boolean;
  if (is_string()) return ValueType::string;
  if (is_list()) return ValueType::list;
  return ValueType::record;
}

const void* Value::container_id() const {
  if (is_list()) return std::get<std::shared_ptr<ValueList>>(data_).get();
  if (is_record()) return std::get<std::shared_ptr<ValueRecord>>(data_).get();
  return nullptr;
}

bool deep_equal(const Value& a, const Value& b) {
  if (a.type() != b.type()) return false;
  switch (a.type()) {
    case ValueType::unit:
      return true;
    case ValueType::number:
      return a.as_number() == b.as_number();
    case ValueType::boolean:
      return a.as_boolean() == b.as_boolean();
    case ValueType::string:
      return a.as_string() == b.as_string();
    case ValueType::list: {
      const auto& la = a.as_list();
      const auto& lb = b.as_list();
      if (la.size() != lb.size()) return false;
      for (std::size_t i = 0; i < la.size(); ++i) {
        if (!deep_equal(la[i], lb[i])) return false;
      }
      return true;
    }
    case ValueType::record: {
      const auto& ra = a.as_record();
      const auto& rb = b.as_record();
      if (ra.size() != rb.size()) return false;
      auto ia = ra.begin();
      auto ib = rb.begin();
      for (; ia != ra.end(); ++ia, ++ib) {
        if (ia->first != ib->first || !deep_equal(ia->second, ib->second)) return false;
      }
      return true;
    }
  }
  return false;
}

bool reaches(const Value& v, const void* container) {
  if (container == nullptr) return false;
  if (v.container_id() == container) return true;
  if (v.is_list()) {
    for (const auto& item : v.as_list()) {
      if (reaches(item, container)) return true;
    }
  } else if (v.is_record()) {
    for (const auto& [key, item] : v.as_record()) {
      if (reaches(item, container)) return true;
    }
  }
  return false;
}

namespace {

std::string number_repr(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 0x1.0p53) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::string Value::repr() const {
  switch (type()) {
    case ValueType::unit:
      return "unit";
    case ValueType::number:
      return number_repr(as_number());
    case ValueType::boolean:
      return as_boolean() ? "true" : "false";
    case ValueType::string:
      return "\"" + as_string() + "\"";
    case ValueType::list: {
      std::string out = "[";
      const auto& items = as_list();
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ", ";
        out += items[i].repr();
      }
      return out + "]";
    }
    case ValueType::record: {
      std::string out = "{";
      bool first = true;
      for (const auto& [key, item] : as_record()) {
        if (!first) out += ", ";
        first = false;
        out += key + ": " + item.repr();
      }
      return out + "}";
    }
  }
  return "?";
}

}  // namespace faasim::policy
