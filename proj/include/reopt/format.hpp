#pragma once

#include <iomanip>
#include <sstream>
#include <string>

namespace reopt {

/// CSV cell for a double: 12 significant digits, locale-independent.
inline std::string csv_number(double x) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(12) << x;
    return os.str();
}

}  // namespace reopt
