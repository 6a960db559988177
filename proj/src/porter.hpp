#ifndef CCP_PORTER_HPP
#define CCP_PORTER_HPP

#include <string>
#include <string_view>

namespace ccp {

// Porter's 1980 suffix-stripping algorithm. Expects a lowercase word;
// words of length <= 2 are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace ccp

#endif
