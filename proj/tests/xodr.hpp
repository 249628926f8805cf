#pragma once

// Tiny OpenDRIVE snippets for tests.

#include <string>

namespace xodr {

inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string line(double s, double x, double y, double hdg, double len) {
    return "<geometry s=\"" + num(s) + "\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" hdg=\"" + num(hdg) +
           "\" length=\"" + num(len) + "\"><line/></geometry>";
}

inline std::string arc(double s, double x, double y, double hdg, double len, double k) {
    return "<geometry s=\"" + num(s) + "\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" hdg=\"" + num(hdg) +
           "\" length=\"" + num(len) + "\"><arc curvature=\"" + num(k) + "\"/></geometry>";
}

inline std::string lane(int id, double a, double b = 0) {
    return "<lane id=\"" + std::to_string(id) + "\" type=\"driving\"><width sOffset=\"0\" a=\"" + num(a) + "\" b=\"" +
           num(b) + "\" c=\"0\" d=\"0\"/></lane>";
}

inline std::string road(const std::string& id, double len, const std::string& geometry, const std::string& left,
                        const std::string& right, const std::string& extra = "") {
    std::string s = "<road id=\"" + id + "\" length=\"" + num(len) + "\" junction=\"-1\">" + extra + "<planView>" +
                    geometry + "</planView><lanes><laneSection s=\"0\">";
    if (!left.empty()) s += "<left>" + left + "</left>";
    s += "<center><lane id=\"0\" type=\"none\"/></center>";
    if (!right.empty()) s += "<right>" + right + "</right>";
    return s + "</laneSection></lanes></road>";
}

inline std::string doc(const std::string& body) {
    return "<?xml version=\"1.0\"?>\n<OpenDRIVE>\n<header revMajor=\"1\" revMinor=\"6\"/>\n" + body + "\n</OpenDRIVE>\n";
}

}  // namespace xodr
