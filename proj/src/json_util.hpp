#pragma once

// Private helpers shared by the .cpp files that read or write the JSON file
// formats. Not installed; keeps vendor/json.hpp out of the public headers.

#include <json.hpp>

#include <initializer_list>
#include <string>

#include "scalefree/common.hpp"

namespace scalefree::detail {

using json = nlohmann::json;

inline json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw ConfigError(what + ": not valid JSON");
  }
  return j;
}

inline void require_object(const json& j, const std::string& what) {
  if (!j.is_object()) {
    throw ConfigError(what + ": expected a JSON object");
  }
}

inline void require_allowed_keys(const json& j,
                                 std::initializer_list<const char*> allowed,
                                 const std::string& what) {
  require_object(j, what);
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(what + ": unknown key '" + item.key() + "'");
    }
  }
}

inline const json& require_key(const json& j, const char* key,
                               const std::string& what) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(what + ": missing key '" + key + "'");
  }
  return *it;
}

inline double as_number(const json& j, const std::string& what) {
  if (!j.is_number()) {
    throw ConfigError(what + ": expected a number");
  }
  return j.get<double>();
}

inline int as_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) {
    throw ConfigError(what + ": expected an integer");
  }
  return j.get<int>();
}

inline Matrix as_matrix(const json& j, const std::string& what) {
  if (!j.is_array()) {
    throw ConfigError(what + ": expected a list of rows");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) {
    return Matrix(0, 0);
  }
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) {
      throw ConfigError(what + ": row " + std::to_string(i + 1) +
                        " is not a list");
    }
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m = Matrix(rows, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(what + ": rows have different lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = as_number(row[static_cast<std::size_t>(c)],
                          what + " entry");
    }
  }
  return m;
}

inline Vector as_vector(const json& j, const std::string& what) {
  if (!j.is_array()) {
    throw ConfigError(what + ": expected a list of numbers");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = as_number(j[static_cast<std::size_t>(i)], what + " entry");
  }
  return v;
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(i, c));
    }
    rows.push_back(row);
  }
  return rows;
}

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(v(i));
  }
  return out;
}

}  // namespace scalefree::detail
