#pragma once

#include <stdexcept>
#include <string>

namespace spslab {

/// Raised on violated preconditions and numerical failures.
class Error : public std::runtime_error {
public:
    explicit Error(std::string const& what) : std::runtime_error(what) {}
};

inline void require(bool cond, std::string const& what)
{
    if (!cond) throw Error(what);
}

} // namespace spslab
