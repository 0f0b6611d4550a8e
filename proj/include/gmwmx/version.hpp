#ifndef GMWMX_VERSION_HPP
#define GMWMX_VERSION_HPP

namespace gmwmx {

inline const char* version() { return "0.1.0"; }

} // namespace gmwmx

#endif
