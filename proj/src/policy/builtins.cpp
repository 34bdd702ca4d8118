#include <array>

#include "faasim/policy/builtins.hpp"

namespace faasim::policy {

namespace {

constexpr std::array<BuiltinSpec, 14> kBuiltins{{
    {"len", 1, false, "len(list) -> number"},
    {"append", 2, false, "append(list, value) -> unit"},
    {"remove_at", 2, false, "remove_at(list, index) -> unit"},
    {"sort_by", 3, false, "sort_by(list, field_name, ascending) -> list"},
    {"ready_ops", 1, true, "ready_ops(pipeline_id or pipeline record) -> list of op records"},
    {"num_pools", 0, true, "num_pools() -> number"},
    {"pool", 1, true, "pool(pool_id) -> pool record"},
    {"running", 1, true, "running(pool_id) -> list of running-op records"},
    {"assign", 2, true, "assign(op_id, pool_id) -> unit"},
    {"suspend", 1, true, "suspend(op_id) -> unit"},
    {"min", 2, false, "min(a, b) -> number"},
    {"max", 2, false, "max(a, b) -> number"},
    {"floor", 1, false, "floor(x) -> number"},
    {"ceil", 1, false, "ceil(x) -> number"},
}};

}  // namespace

const BuiltinSpec* find_builtin(std::string_view name) {
  for (const auto& spec : kBuiltins) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

std::string builtin_names_joined() {
  std::string out;
  for (const auto& spec : kBuiltins) {
    if (!out.empty()) out += ", ";
    out += spec.name;
  }
  return out;
}

}  // namespace faasim::policy
