#ifndef KINEXP_JSONIO_HPP
#define KINEXP_JSONIO_HPP

#include <json.hpp>

#include "kinexp/quad_field.hpp"

namespace kinexp {

using json = nlohmann::json;

// Wire format for field elements: the pair of rational strings plus the
// parameter a, with a display-only decimal.
inline json to_json(const QuadElem& x) {
    return json{{"a", x.a()},
                {"p", rat_to_string(x.p())},
                {"q", rat_to_string(x.q())},
                {"dec", quad_to_decimal(x)}};
}

inline QuadElem quad_from_json(const json& j) {
    return QuadElem(j.at("a").get<long>(), rat_from_string(j.at("p").get<std::string>()),
                    rat_from_string(j.at("q").get<std::string>()));
}

inline json to_json(const CirclePoint& x) { return to_json(x.value()); }

inline CirclePoint circle_from_json(const json& j) { return CirclePoint(quad_from_json(j)); }

}  // namespace kinexp

#endif  // KINEXP_JSONIO_HPP
