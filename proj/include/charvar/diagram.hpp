#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "charvar/tangle.hpp"

namespace charvar {

// Local crossing geometry. Ports are the four corners; the two strands run
// nw--se and sw--ne. A chirality of +1 puts the sw--ne strand on top; the
// building block [1] uses +1 (pinned by the writhe and longitude identities
// of the three benchmark knots).
enum Port { PORT_NW = 0, PORT_NE = 1, PORT_SW = 2, PORT_SE = 3 };

inline Port through_port(Port p) {
    switch (p) {
        case PORT_NW: return PORT_SE;
        case PORT_SE: return PORT_NW;
        case PORT_SW: return PORT_NE;
        default: return PORT_SW;
    }
}

// Flow vector pointing into the crossing when entering at port p.
inline void port_flow(Port p, double& x, double& y) {
    switch (p) {
        case PORT_NW: x = 1; y = -1; break;
        case PORT_NE: x = -1; y = -1; break;
        case PORT_SW: x = 1; y = 1; break;
        default: x = -1; y = 1; break;
    }
}

enum class ClosureKind { N, D }; // N: nw-ne & sw-se, D: nw-sw & ne-se

struct WalkStep {
    int crossing;
    int over_arc;
    int exponent; // -sign(crossing): the walk word is m^w z_1 ... z_n
};

// A fully elaborated diagram: crossings with Wirtinger relations between
// numbered arcs, plus boundary data when the diagram is an open tangle.
struct Diagram {
    struct Crossing {
        int over_arc = -1;
        int under_in = -1;
        int under_out = -1;
        int exp = 0;  // relation rho(under_out) = rho(over)^exp rho(under_in) rho(over)^-exp
        int sign = 0; // crossing sign under the stored arc directions
        int chirality = +1;
        int over_entry = -1;  // port where the over strand enters (stored dir)
        int under_entry = -1; // port where the under strand enters

        // arc covering port p, and whether the stored direction enters there
        std::pair<int, bool> port_arc(int p) const {
            if (p == over_entry) return {over_arc, true};
            if (p == under_entry) return {under_in, true};
            if (through_port(static_cast<Port>(p)) == over_entry) return {over_arc, false};
            return {under_out, false};
        }
    };
    struct End {
        int arc = -1;
        bool outward = false; // stored arc direction points out of the tangle
    };

    int n_arcs = 0;
    std::vector<Crossing> crossings;
    bool closed = false;
    int n_components = 0;
    std::array<End, 4> ends{}; // nw, ne, sw, se of the root tangle (open only)

    // Per tree leaf (build order): the socket-level ends of that leaf.
    struct LeafInfo {
        const Tangle* node;
        std::array<End, 4> ends;
        std::vector<int> crossing_ids; // in chain order
    };
    std::vector<LeafInfo> leaves;
    std::map<const Tangle*, std::array<End, 4>> node_ends;

    int writhe() const {
        int w = 0;
        for (const Crossing& c : crossings) w += c.sign;
        return w;
    }
};

namespace detail {

// Port-level builder: crossings and bare wires carry sockets, gluing solders
// sockets in pairs, and the result is traced into strands and arcs.
class DiagramBuilder {
public:
    struct Ends4 { int e[4]; }; // socket ids for nw, ne, sw, se

    int new_crossing(int chirality) {
        int id = static_cast<int>(xchirality_.size());
        xchirality_.push_back(chirality);
        xsock_.push_back({new_socket(OwnerXing, id, 0), new_socket(OwnerXing, id, 1),
                          new_socket(OwnerXing, id, 2), new_socket(OwnerXing, id, 3)});
        return id;
    }

    int new_wire() {
        int id = static_cast<int>(wires_.size());
        wires_.push_back({new_socket(OwnerWire, id, 0), new_socket(OwnerWire, id, 1)});
        return id;
    }

    void solder(int s1, int s2) {
        if (sockets_[s1].peer != -1 || sockets_[s2].peer != -1)
            throw Error("diagram: socket soldered twice");
        sockets_[s1].peer = s2;
        sockets_[s2].peer = s1;
    }

    int crossing_socket(int xing, Port p) const { return xsock_[xing].e[p]; }
    int wire_socket(int w, int end) const { return wires_[w].e[end]; }

    Ends4 emit(const Tangle& node, Diagram& out) {
        switch (node.kind) {
            case Tangle::Kind::Twist: {
                Ends4 ends = emit_twist(node, out);
                leaf_sockets_.push_back(ends);
                node_sockets_[&node] = ends;
                return ends;
            }
            case Tangle::Kind::Plus: {
                Ends4 l = emit(*node.left, out);
                Ends4 r = emit(*node.right, out);
                solder(l.e[PORT_NE], r.e[PORT_NW]);
                solder(l.e[PORT_SE], r.e[PORT_SW]);
                Ends4 ends{l.e[PORT_NW], r.e[PORT_NE], l.e[PORT_SW], r.e[PORT_SE]};
                node_sockets_[&node] = ends;
                return ends;
            }
            case Tangle::Kind::Star: {
                Ends4 t = emit(*node.left, out);
                Ends4 b = emit(*node.right, out);
                solder(t.e[PORT_SW], b.e[PORT_NW]);
                solder(t.e[PORT_SE], b.e[PORT_NE]);
                Ends4 ends{t.e[PORT_NW], t.e[PORT_NE], b.e[PORT_SW], b.e[PORT_SE]};
                node_sockets_[&node] = ends;
                return ends;
            }
        }
        throw Error("diagram: bad tangle node");
    }

    // Finish an open tangle: attach boundary stubs and trace.
    void finish_open(const Ends4& root, Diagram& out) {
        for (int i = 0; i < 4; ++i) {
            boundary_[i] = new_socket(OwnerBoundary, 0, i);
            solder(boundary_[i], root.e[i]);
        }
        trace(out, /*closed=*/false);
    }

    void finish_closed(const Ends4& root, ClosureKind closure, Diagram& out) {
        if (closure == ClosureKind::N) {
            solder(root.e[PORT_NW], root.e[PORT_NE]);
            solder(root.e[PORT_SW], root.e[PORT_SE]);
        } else {
            solder(root.e[PORT_NW], root.e[PORT_SW]);
            solder(root.e[PORT_NE], root.e[PORT_SE]);
        }
        trace(out, /*closed=*/true);
    }

private:
    enum OwnerKind { OwnerXing, OwnerWire, OwnerBoundary };
    struct Socket {
        int peer = -1;
        OwnerKind kind;
        int owner, slot;
    };
    struct XSock { int e[4]; };
    struct WSock { int e[2]; };

    int new_socket(OwnerKind k, int owner, int slot) {
        sockets_.push_back({-1, k, owner, slot});
        return static_cast<int>(sockets_.size()) - 1;
    }

    Ends4 emit_twist(const Tangle& node, Diagram& out) {
        long k = node.count;
        if (k == 0) {
            int w1 = new_wire(), w2 = new_wire();
            // row: w1 = nw-ne, w2 = sw-se; column: w1 = nw-sw, w2 = ne-se
            Diagram::LeafInfo info;
            info.node = &node;
            leaf_nodes_.push_back(&node);
            out.leaves.push_back(info);
            if (!node.vertical)
                return {wire_socket(w1, 0), wire_socket(w1, 1), wire_socket(w2, 0), wire_socket(w2, 1)};
            return {wire_socket(w1, 0), wire_socket(w2, 0), wire_socket(w1, 1), wire_socket(w2, 1)};
        }
        int chi = k > 0 ? +1 : -1;
        long m = k > 0 ? k : -k;
        std::vector<int> ids;
        for (long i = 0; i < m; ++i) ids.push_back(new_crossing(chi));
        if (!node.vertical) {
            for (long i = 0; i + 1 < m; ++i) {
                solder(crossing_socket(ids[i], PORT_NE), crossing_socket(ids[i + 1], PORT_NW));
                solder(crossing_socket(ids[i], PORT_SE), crossing_socket(ids[i + 1], PORT_SW));
            }
        } else {
            for (long i = 0; i + 1 < m; ++i) {
                solder(crossing_socket(ids[i], PORT_SW), crossing_socket(ids[i + 1], PORT_NW));
                solder(crossing_socket(ids[i], PORT_SE), crossing_socket(ids[i + 1], PORT_NE));
            }
        }
        Diagram::LeafInfo info;
        info.node = &node;
        info.crossing_ids = ids;
        leaf_nodes_.push_back(&node);
        out.leaves.push_back(info);
        if (!node.vertical)
            return {crossing_socket(ids[0], PORT_NW), crossing_socket(ids[m - 1], PORT_NE),
                    crossing_socket(ids[0], PORT_SW), crossing_socket(ids[m - 1], PORT_SE)};
        return {crossing_socket(ids[0], PORT_NW), crossing_socket(ids[0], PORT_NE),
                crossing_socket(ids[m - 1], PORT_SW), crossing_socket(ids[m - 1], PORT_SE)};
    }

    struct Passage {
        int socket_in;  // socket where the strand enters the element
        int socket_out; // where it leaves
        bool over;      // crossing passages only
        int xing = -1;
    };

    // The positive crossing [1] carries its nw-se strand on top; this is the
    // orientation for which the eastward twist recursion picks up exponent +1
    // at every crossing of [n], as the twist formulas require.
    bool passage_over(int xing, Port in) const {
        bool nwse = (in == PORT_NW || in == PORT_SE);
        return (xchirality_[xing] > 0) ? nwse : !nwse;
    }

    // Walk one strand starting by leaving `start` (which must be soldered)
    // until hitting a boundary stub or returning to the start. Records the
    // sockets visited with their roles.
    struct StrandTrace {
        std::vector<Passage> passages;
        std::vector<int> joints; // soldered socket pairs crossed, flattened
        bool cycle = false;
        int end_boundary = -1;   // boundary slot for open strands
        int start_boundary = -1;
    };

    StrandTrace walk_strand(int start_socket) {
        StrandTrace tr;
        if (sockets_[start_socket].kind == OwnerBoundary)
            tr.start_boundary = sockets_[start_socket].slot;
        int cur = start_socket;
        for (;;) {
            int peer = sockets_[cur].peer;
            if (peer < 0) throw Error("diagram: open socket during trace");
            tr.joints.push_back(cur);
            tr.joints.push_back(peer);
            const Socket& ps = sockets_[peer];
            if (ps.kind == OwnerBoundary) {
                tr.end_boundary = ps.slot;
                return tr;
            }
            int exit;
            if (ps.kind == OwnerWire) {
                const WSock& w = wires_[ps.owner];
                exit = (w.e[0] == peer) ? w.e[1] : w.e[0];
                tr.passages.push_back({peer, exit, /*over=*/true, -1}); // bare wire
            } else {
                Port in = static_cast<Port>(ps.slot);
                Port outp = through_port(in);
                exit = crossing_socket(ps.owner, outp);
                tr.passages.push_back({peer, exit, passage_over(ps.owner, in), ps.owner});
            }
            if (exit == start_socket) { tr.cycle = true; return tr; }
            cur = exit;
        }
    }

    void trace(Diagram& out, bool closed);

public:
    // filled by trace(): socket -> (arc id, strand leaves the element side
    // of this socket). For a socket s on a solder joint, `leaving[s]` is true
    // when the traversal direction goes from s to its peer.
    std::vector<int> socket_arc;
    std::vector<char> socket_leaving;

private:
    std::vector<Socket> sockets_;
    std::vector<int> xchirality_;
    std::vector<XSock> xsock_;
    std::vector<WSock> wires_;
    std::vector<const Tangle*> leaf_nodes_;
    std::vector<Ends4> leaf_sockets_;
    std::map<const Tangle*, Ends4> node_sockets_;
    int boundary_[4] = {-1, -1, -1, -1};
};

inline void DiagramBuilder::trace(Diagram& out, bool closed) {
    out.closed = closed;
    out.crossings.assign(xchirality_.size(), {});
    for (std::size_t i = 0; i < xchirality_.size(); ++i)
        out.crossings[i].chirality = xchirality_[i];

    socket_arc.assign(sockets_.size(), -1);
    socket_leaving.assign(sockets_.size(), 0);

    std::vector<char> socket_done(sockets_.size(), 0);
    std::vector<StrandTrace> strands;

    auto consume = [&](const StrandTrace& tr) {
        for (std::size_t i = 0; i + 1 < tr.joints.size(); i += 2) {
            socket_done[tr.joints[i]] = 1;
            socket_done[tr.joints[i + 1]] = 1;
            socket_leaving[tr.joints[i]] = 1;     // traversal goes joint[i] -> joint[i+1]
        }
        for (const Passage& p : tr.passages) {
            socket_done[p.socket_in] = 1;
            socket_done[p.socket_out] = 1;
        }
    };

    if (!closed) {
        // one strand from each unvisited boundary stub, in nw,ne,sw,se order
        for (int bslot = 0; bslot < 4; ++bslot) {
            int bs = boundary_[bslot];
            if (socket_done[bs]) continue;
            StrandTrace tr = walk_strand(bs);
            consume(tr);
            strands.push_back(std::move(tr));
        }
    }
    // remaining cycles (all strands of a closed diagram, loops of an open one)
    for (std::size_t s = 0; s < sockets_.size(); ++s) {
        if (socket_done[s] || sockets_[s].kind == OwnerBoundary) continue;
        StrandTrace tr = walk_strand(static_cast<int>(s));
        if (!tr.cycle) throw Error("diagram: stray open strand");
        consume(tr);
        strands.push_back(std::move(tr));
    }
    out.n_components = static_cast<int>(strands.size());

    // --- split strands into arcs ------------------------------------------
    int next_arc = 0;
    struct UnderHit { int xing; int in_arc; int out_arc; };
    std::vector<UnderHit> under_hits;

    for (StrandTrace& tr : strands) {
        std::size_t np = tr.passages.size();
        bool any_under = false;
        for (const Passage& p : tr.passages)
            if (p.xing >= 0 && !p.over) any_under = true;

        if (!any_under) {
            int arc = next_arc++;
            for (std::size_t i = 0; i + 1 < tr.joints.size(); i += 2) {
                socket_arc[tr.joints[i]] = arc;
                socket_arc[tr.joints[i + 1]] = arc;
            }
            for (const Passage& p : tr.passages)
                if (p.xing >= 0) out.crossings[p.xing].over_arc = arc;
            continue;
        }

        // rotate a cycle so it starts right after an under passage
        std::size_t start = 0;
        if (tr.cycle) {
            for (std::size_t i = 0; i < np; ++i)
                if (tr.passages[i].xing >= 0 && !tr.passages[i].over) { start = i + 1; break; }
        }
        int arc = next_arc++;
        int first_arc = arc;
        // assign joint sockets: joint i sits before passage i (joints.size() = 2*(np+cycle?np:np+1)) --
        // walk passages in order, tagging the joint ahead of each passage.
        std::size_t njoint_pairs = tr.joints.size() / 2;
        auto tag_joint = [&](std::size_t jp, int a) {
            socket_arc[tr.joints[2 * jp]] = a;
            socket_arc[tr.joints[2 * jp + 1]] = a;
        };
        // joint jp connects passage jp-1 exit to passage jp entry (open:
        // joint 0 = boundary to passage 0; there are np+1 joints).
        // For cycles there are np joints; joint jp precedes passage jp.
        for (std::size_t step = 0; step < np; ++step) {
            std::size_t i = (start + step) % np;
            tag_joint(tr.cycle ? i : i, arc);
            const Passage& p = tr.passages[i];
            if (p.xing < 0) continue; // wire
            if (p.over) {
                out.crossings[p.xing].over_arc = arc;
            } else {
                int in_arc = arc;
                bool last_step = (step + 1 == np);
                int out_arc;
                if (tr.cycle && last_step) out_arc = first_arc;
                else out_arc = next_arc++;
                under_hits.push_back({p.xing, in_arc, out_arc});
                arc = out_arc;
            }
        }
        if (!tr.cycle) tag_joint(np, arc); // trailing joint to the boundary
    }
    out.n_arcs = next_arc;

    for (const UnderHit& h : under_hits) {
        out.crossings[h.xing].under_in = h.in_arc;
        out.crossings[h.xing].under_out = h.out_arc;
    }

    // --- exponents and signs ------------------------------------------------
    // For each crossing, find the entry ports of the over and under passages
    // under the stored traversal directions.
    std::vector<int> over_entry(xchirality_.size(), -1), under_entry(xchirality_.size(), -1);
    for (std::size_t s = 0; s < sockets_.size(); ++s) {
        if (sockets_[s].kind != OwnerXing) continue;
        // the strand enters the crossing at socket s iff the traversal was
        // moving toward s across its joint, i.e. peer(s) is 'leaving'.
        int peer = sockets_[s].peer;
        if (peer < 0 || !socket_leaving[peer]) continue;
        Port p = static_cast<Port>(sockets_[s].slot);
        bool nwse = (p == PORT_NW || p == PORT_SE);
        bool over = (xchirality_[sockets_[s].owner] > 0) ? nwse : !nwse;
        if (over) over_entry[sockets_[s].owner] = p;
        else under_entry[sockets_[s].owner] = p;
    }
    for (std::size_t x = 0; x < xchirality_.size(); ++x) {
        if (over_entry[x] < 0 || under_entry[x] < 0)
            throw Error("diagram: crossing with unresolved passages");
        double ox, oy, ux, uy;
        port_flow(static_cast<Port>(over_entry[x]), ox, oy);
        port_flow(static_cast<Port>(under_entry[x]), ux, uy);
        double cross = ox * uy - oy * ux;
        int sign = cross > 0 ? +1 : -1;
        out.crossings[x].sign = sign;
        out.crossings[x].exp = sign;
        out.crossings[x].over_entry = over_entry[x];
        out.crossings[x].under_entry = under_entry[x];
    }

    // --- boundary ends ------------------------------------------------------
    auto end_of_socket = [&](int sock) {
        Diagram::End e;
        e.arc = socket_arc[sock];
        // outward at this end means the traversal leaves the tangle here
        e.outward = socket_leaving[sock] != 0;
        return e;
    };
    if (!closed) {
        for (int i = 0; i < 4; ++i) {
            int stub = boundary_[i];
            int inner = sockets_[stub].peer;
            Diagram::End e;
            e.arc = socket_arc[inner];
            e.outward = socket_leaving[inner] != 0;
            out.ends[i] = e;
        }
    }
    // leaf + node end annotations (nodes must not be shared between tree
    // positions; builders allocate fresh nodes per occurrence)
    for (auto& [node, ends4] : node_sockets_) {
        std::array<Diagram::End, 4> es;
        for (int i = 0; i < 4; ++i) es[i] = end_of_socket(ends4.e[i]);
        out.node_ends[node] = es;
    }
    for (std::size_t li = 0; li < out.leaves.size(); ++li) {
        for (int i = 0; i < 4; ++i)
            out.leaves[li].ends[i] = end_of_socket(leaf_sockets_[li].e[i]);
    }
}

} // namespace detail

inline Diagram elaborate(const Tangle& root, std::optional<ClosureKind> closure) {
    detail::DiagramBuilder b;
    Diagram out;
    detail::DiagramBuilder::Ends4 ends = b.emit(root, out);
    if (closure) b.finish_closed(ends, *closure, out);
    else b.finish_open(ends, out);
    return out;
}

} // namespace charvar
