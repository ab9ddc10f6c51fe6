#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "splitflow/model.hpp"

namespace splitflow {

/// Malformed input: unreadable file, bad JSON, or schema violation.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the instance schema:
///   {"links":[{"a":num,"b":num,"d":int=1}...],
///    "players":[{"flow":num,"behavior":"atomic"|"wardrop","links":[int...]=all}...]}
/// The result is in raw link order; call validate() to canonicalize.
Instance parse_instance(std::string_view text);
Instance load_instance(const std::string& path);

/// Serializes in raw link order, so parse_instance(format_instance(validate(x)))
/// describes the same game as x.
std::string format_instance(const Instance& instance);

}  // namespace splitflow
