#include "ultrashift/enumeration.hpp"

#include "ultrashift/builtins.hpp"

namespace ultrashift {

EnumerationPtr canonical_enumeration(const Ultragraph& g) {
    const std::string k = g.kind();
    if (k == "finite") return finite_enumeration(g);
    if (k == "line") return line_enumeration(g);
    if (k == "loopline") return loopline_enumeration(g);
    if (k == "gprime") return example_enumeration(g, line_enumeration(make_line()));
    throw std::invalid_argument("no canonical enumeration for backend kind " + k);
}

}  // namespace ultrashift
