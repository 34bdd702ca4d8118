#pragma once

#include <string>
#include <string_view>

namespace faasim::policy {

struct BuiltinSpec {
  const char* name;
  int arity;
  bool schedule_only;
  const char* signature;
};

// The normative builtin set; the validator and interpreter share this table.
const BuiltinSpec* find_builtin(std::string_view name);
std::string builtin_names_joined();

}  // namespace faasim::policy
