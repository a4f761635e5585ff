#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "fbl/estimate.hpp"
#include "fbl/homfn.hpp"
#include "fbl/phmap.hpp"
#include "fbl/space.hpp"
#include "fbl/witnesses.hpp"

namespace fbl {

using nlohmann::json;

/// Malformed or inconsistent serialized input; the message names the violated
/// precondition.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Bounded positive-integer read: negative, fractional or absurdly large
/// inputs become ConfigErrors instead of silent wraparound.
inline std::size_t read_count(const json& j, const char* what, std::size_t max_value) {
    if (!j.is_number_integer() && !j.is_number_unsigned())
        throw ConfigError(std::string(what) + " must be a positive integer");
    long long v = j.get<long long>();
    if (v < 1 || std::size_t(v) > max_value)
        throw ConfigError(std::string(what) + " must be in [1, " + std::to_string(max_value) + "]");
    return std::size_t(v);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Space

inline json space_to_json(const Space& s) {
    json j;
    j["dim"] = s.dim();
    if (s.kind() == NormKind::polyhedral) {
        json verts = json::array();
        for (const auto& v : s.vertices()) verts.push_back(v.coords);
        j["norm"] = json{{"polyhedral", verts}};
    } else {
        j["norm"] = to_string(s.kind());
    }
    return j;
}

inline SpacePtr space_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("norm"))
        throw ConfigError("space: expected {\"dim\": n, \"norm\": ...}");
    std::size_t dim = detail::read_count(j.at("dim"), "space dim", 100000);
    const json& n = j.at("norm");
    try {
        if (n.is_string()) {
            std::string k = n.get<std::string>();
            if (k == "l1") return make_lq_space(dim, NormKind::l1);
            if (k == "l2") return make_lq_space(dim, NormKind::l2);
            if (k == "linf") return make_lq_space(dim, NormKind::linf);
            throw ConfigError("space: unknown norm tag '" + k + "'");
        }
        if (n.is_object() && n.contains("polyhedral")) {
            std::vector<Vec> verts;
            for (const auto& v : n.at("polyhedral"))
                verts.push_back(Vec(v.get<std::vector<double>>()));
            return make_polyhedral_space(dim, std::move(verts));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("space: ") + e.what());
    }
    throw ConfigError("space: norm must be \"l1\"|\"l2\"|\"linf\" or {\"polyhedral\": [...]}");
}

// ---------------------------------------------------------------------------
// HomFn AST and PHMap (mutually recursive)

inline json homfn_to_json(const HomFn& f);
inline HomFn homfn_from_json(const SpacePtr& space, const json& j);
inline json phmap_to_json(const PHMap& phi);
inline PHMap phmap_from_json(const SpacePtr& target, const SpacePtr& source, const json& j);

namespace detail {

inline json node_to_json(const Space& space, const NodePtr& node) {
    switch (node->kind()) {
        case NodeKind::delta:
            return json{{"op", "delta"}, {"vec", static_cast<const DeltaNode&>(*node).x.coords}};
        case NodeKind::normfn:
            return json{{"op", "normfn"}};
        case NodeKind::scale: {
            const auto& s = static_cast<const ScaleNode&>(*node);
            return json{{"op", "scale"}, {"c", s.c}, {"arg", node_to_json(space, s.child)}};
        }
        case NodeKind::abs:
            return json{{"op", "abs"},
                        {"arg", node_to_json(space, static_cast<const AbsNode&>(*node).child)}};
        case NodeKind::sum:
        case NodeKind::sup:
        case NodeKind::inf: {
            json args = json::array();
            for (const auto& c : node->children()) args.push_back(node_to_json(space, c));
            const char* op = node->kind() == NodeKind::sum   ? "sum"
                             : node->kind() == NodeKind::sup ? "sup"
                                                             : "inf";
            return json{{"op", op}, {"args", args}};
        }
        case NodeKind::ray:
            return json{{"op", "ray"},
                        {"dir", static_cast<const RayIndicatorNode&>(*node).dir.coords}};
        case NodeKind::mu: {
            const auto& m = static_cast<const MuInducedNode&>(*node);
            json atoms = json::array();
            for (const auto& a : m.mu.atoms) atoms.push_back(json::array({a.weight, a.point.coords}));
            return json{{"op", "mu"}, {"p", m.p}, {"atoms", atoms}};
        }
        case NodeKind::compose: {
            const auto& c = static_cast<const ComposeNode&>(*node);
            return json{{"op", "compose"},
                        {"map", phmap_to_json(c.map)},
                        {"espace", space_to_json(c.map.target())},
                        {"arg", homfn_to_json(c.inner)}};
        }
        case NodeKind::custom:
            throw ConfigError("homfn: custom nodes are not serializable");
    }
    throw ConfigError("homfn: unknown node");
}

}  // namespace detail

inline json homfn_to_json(const HomFn& f) { return detail::node_to_json(f.space(), f.root()); }

inline HomFn homfn_from_json(const SpacePtr& space, const json& j) {
    if (!j.is_object() || !j.contains("op")) throw ConfigError("homfn: node missing \"op\"");
    std::string op = j.at("op").get<std::string>();
    try {
        if (op == "delta") return delta(space, Vec(j.at("vec").get<std::vector<double>>()));
        if (op == "normfn") return norm_fn(space);
        if (op == "scale")
            return scale(j.at("c").get<double>(), homfn_from_json(space, j.at("arg")));
        if (op == "abs") return abs(homfn_from_json(space, j.at("arg")));
        if (op == "sum" || op == "sup" || op == "inf") {
            std::vector<HomFn> args;
            for (const auto& a : j.at("args")) args.push_back(homfn_from_json(space, a));
            if (op == "sum") return sum(args);
            if (op == "sup") return sup(args);
            return inf(args);
        }
        if (op == "ray") return ray_indicator(space, Func(j.at("dir").get<std::vector<double>>()));
        if (op == "mu") {
            DiscreteMeasure mu;
            for (const auto& a : j.at("atoms"))
                mu.atoms.push_back(
                    {a.at(0).get<double>(), Vec(a.at(1).get<std::vector<double>>())});
            return mu_fn(space, std::move(mu), j.at("p").get<double>());
        }
        if (op == "compose") {
            // the inner function lives over E*; E defaults to the outer space
            SpacePtr espace = j.contains("espace") ? space_from_json(j.at("espace")) : space;
            PHMap phi = phmap_from_json(espace, space, j.at("map"));
            return compose_op(phi, homfn_from_json(espace, j.at("arg")));
        }
    } catch (const json::exception& e) {
        throw ConfigError("homfn: malformed \"" + op + "\" node: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError("homfn: invalid \"" + op + "\" node: " + e.what());
    }
    throw ConfigError("homfn: unknown op '" + op + "'");
}

inline json phmap_to_json(const PHMap& phi) {
    switch (phi.kind()) {
        case MapKind::adjoint: {
            const auto& a = static_cast<const AdjointNode&>(*phi.node()).a;
            json rows = json::array();
            for (Eigen::Index i = 0; i < a.rows(); ++i) {
                json row = json::array();
                for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
                rows.push_back(row);
            }
            return json{{"map", "adjoint"}, {"matrix", rows}};
        }
        case MapKind::modulus:
            return json{{"map", "modulus"}};
        case MapKind::rank_one: {
            const auto& r = static_cast<const RankOneNode&>(*phi.node());
            return json{{"map", "rank1"}, {"fn", homfn_to_json(r.f)}, {"x0star", r.x0star.coords}};
        }
        case MapKind::tabulated: {
            const auto& t = static_cast<const TabulatedNode&>(*phi.node());
            json action = json::object();
            for (std::size_t i = 0; i < t.action.size(); ++i)
                action[std::to_string(i)] = homfn_to_json(t.action[i]);
            return json{{"map", "tabulated"}, {"action", action}};
        }
        case MapKind::composite: {
            const auto& c = static_cast<const CompositeNode&>(*phi.node());
            return json{{"map", "compose"},
                        {"outer", phmap_to_json(c.outer)},
                        {"inner", phmap_to_json(c.inner)},
                        {"mid", space_to_json(c.inner.target())}};
        }
    }
    throw ConfigError("phmap: unknown kind");
}

inline PHMap phmap_from_json(const SpacePtr& target, const SpacePtr& source, const json& j) {
    if (!j.is_object() || !j.contains("map")) throw ConfigError("phmap: node missing \"map\"");
    std::string kind = j.at("map").get<std::string>();
    try {
        if (kind == "adjoint")
            return adjoint_map(target, source,
                               j.at("matrix").get<std::vector<std::vector<double>>>());
        if (kind == "modulus") return modulus_map(target, source);
        if (kind == "rank1")
            return rank_one_map(target, homfn_from_json(source, j.at("fn")),
                                Func(j.at("x0star").get<std::vector<double>>()));
        if (kind == "tabulated") {
            std::vector<HomFn> action;
            const json& a = j.at("action");
            for (std::size_t i = 0; i < a.size(); ++i) {
                std::string key = std::to_string(i);
                if (!a.contains(key))
                    throw ConfigError("phmap: tabulated action missing basis entry " + key);
                action.push_back(homfn_from_json(source, a.at(key)));
            }
            return extract_phi(target, source, std::move(action));
        }
        if (kind == "compose") {
            SpacePtr mid = j.contains("mid") ? space_from_json(j.at("mid")) : source;
            PHMap inner = phmap_from_json(mid, source, j.at("inner"));
            PHMap outer = phmap_from_json(target, mid, j.at("outer"));
            return compose_maps(std::move(outer), std::move(inner));
        }
    } catch (const json::exception& e) {
        throw ConfigError("phmap: malformed \"" + kind + "\" node: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError("phmap: invalid \"" + kind + "\" node: " + e.what());
    }
    throw ConfigError("phmap: unknown map '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Estimates and reports

inline json estimate_to_json(const NormEstimate& e) {
    json j;
    j["lower"] = e.lower;
    j["upper"] = std::isfinite(e.upper) ? json(e.upper) : json("inf");
    j["method"] = to_string(e.method);
    json w = json::object();
    if (e.witness_point) w["point"] = e.witness_point->coords;
    if (e.witness_signs) w["signs"] = *e.witness_signs;
    if (e.witness_functional) w["functional"] = e.witness_functional->coords;
    if (e.witness_tuple) {
        json t = json::array();
        for (const auto& f : *e.witness_tuple) t.push_back(f.coords);
        w["tuple"] = t;
    }
    j["witness"] = w;
    return j;
}

inline json witness_report_to_json(const WitnessReport& r) {
    json j;
    j["construction"] = r.construction;
    json params = json::object();
    for (const auto& [k, v] : r.parameters) params[k] = v;
    j["parameters"] = params;
    json cert = json::array();
    for (const auto& [k, v] : r.certificate) cert.push_back(json::array({k, v}));
    j["certificate"] = cert;
    j["f"] = r.f ? homfn_to_json(*r.f) : json(nullptr);
    return j;
}

inline json classify_report_to_json(const ClassifyReport& r) {
    json j;
    j["classification"] = to_string(r.classification);
    j["sup_abs"] = r.sup_abs;
    j["jump"] = r.jump;
    j["modulus"] = r.modulus;
    if (r.jump_point) j["jump_point"] = r.jump_point->coords;
    return j;
}

}  // namespace fbl
