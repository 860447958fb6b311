// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tgif/error.hpp"

namespace tgif {

using Json = nlohmann::ordered_json;

/// Throws "bad-config" naming the first key of `j` not in `allowed`.
inline void reject_unknown_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                                std::string_view context) {
  if (!j.is_object()) {
    throw Error("bad-config", std::string(context) + " must be an object");
  }
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error("bad-config", "unknown key '" + key + "' in " + std::string(context));
    }
  }
}

/// Reads j[key] into `out` when present.
template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw Error("bad-config", std::string("key '") + key + "': " + e.what());
    }
  }
}

}  // namespace tgif
