#include "gdyn/collision/bvh.hpp"

#include <algorithm>
#include <numeric>

namespace gdyn {

int Bvh::build_range(std::vector<int>& order, const std::vector<Aabb>& boxes, int begin, int end)
{
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin == 1) {
        Node& n = nodes_[node_id];
        n.prim = order[begin];
        n.box = boxes[order[begin]];
        n.box.inflate(inflation_);
        return node_id;
    }

    Aabb centroid_box = Aabb::of_point(0.5 * (boxes[order[begin]].lo + boxes[order[begin]].hi));
    for (int k = begin + 1; k < end; ++k)
        centroid_box.grow(0.5 * (boxes[order[k]].lo + boxes[order[k]].hi));
    int axis = 0;
    const Vec3 ext = centroid_box.hi - centroid_box.lo;
    if (ext.y() > ext.x()) axis = 1;
    if (ext.z() > ext[axis]) axis = 2;

    const int mid = (begin + end) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int a, int b) {
                         const double ca = boxes[a].lo[axis] + boxes[a].hi[axis];
                         const double cb = boxes[b].lo[axis] + boxes[b].hi[axis];
                         return ca < cb || (ca == cb && a < b);
                     });

    const int left = build_range(order, boxes, begin, mid);
    const int right = build_range(order, boxes, mid, end);
    Node& n = nodes_[node_id];
    n.left = left;
    n.right = right;
    n.box = nodes_[left].box;
    n.box.grow(nodes_[right].box);
    return node_id;
}

void Bvh::build(const std::vector<Aabb>& prim_boxes, double inflation)
{
    nodes_.clear();
    n_prims_ = static_cast<int>(prim_boxes.size());
    inflation_ = inflation;
    root_ = -1;
    if (n_prims_ == 0) return;
    nodes_.reserve(2 * size_t(n_prims_));
    std::vector<int> order(n_prims_);
    std::iota(order.begin(), order.end(), 0);
    root_ = build_range(order, prim_boxes, 0, n_prims_);
}

void Bvh::refit(const std::vector<Aabb>& prim_boxes)
{
    // Children are created after their parent, so a reverse sweep sees
    // children before parents.
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.prim >= 0) {
            n.box = prim_boxes[n.prim];
            n.box.inflate(inflation_);
        } else {
            n.box = nodes_[n.left].box;
            n.box.grow(nodes_[n.right].box);
        }
    }
}

void Bvh::query(const Aabb& box, std::vector<int>& out) const
{
    if (root_ < 0) return;
    int stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        if (!n.box.overlaps(box)) continue;
        if (n.prim >= 0) {
            out.push_back(n.prim);
        } else {
            stack[top++] = n.left;
            stack[top++] = n.right;
        }
    }
}

std::vector<std::pair<int, int>> Bvh::self_pairs() const
{
    std::vector<std::pair<int, int>> out;
    if (root_ < 0) return out;

    // Explicit stack of node pairs; (n, n) expands to children combinations.
    std::vector<std::pair<int, int>> stack;
    stack.emplace_back(root_, root_);
    while (!stack.empty()) {
        const auto [ia, ib] = stack.back();
        stack.pop_back();
        const Node& a = nodes_[ia];
        const Node& b = nodes_[ib];
        if (ia == ib) {
            if (a.prim >= 0) continue;
            stack.emplace_back(a.left, a.left);
            stack.emplace_back(a.right, a.right);
            stack.emplace_back(a.left, a.right);
            continue;
        }
        if (!a.box.overlaps(b.box)) continue;
        if (a.prim >= 0 && b.prim >= 0) {
            out.emplace_back(std::min(a.prim, b.prim), std::max(a.prim, b.prim));
        } else if (a.prim >= 0) {
            stack.emplace_back(ia, b.left);
            stack.emplace_back(ia, b.right);
        } else {
            stack.emplace_back(a.left, ib);
            stack.emplace_back(a.right, ib);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::pair<int, int>> Bvh::tree_pairs(const Bvh& a, const Bvh& b)
{
    std::vector<std::pair<int, int>> out;
    if (a.root_ < 0 || b.root_ < 0) return out;
    std::vector<std::pair<int, int>> stack;
    stack.emplace_back(a.root_, b.root_);
    while (!stack.empty()) {
        const auto [ia, ib] = stack.back();
        stack.pop_back();
        const Node& na = a.nodes_[ia];
        const Node& nb = b.nodes_[ib];
        if (!na.box.overlaps(nb.box)) continue;
        if (na.prim >= 0 && nb.prim >= 0) {
            out.emplace_back(na.prim, nb.prim);
        } else if (na.prim >= 0) {
            stack.emplace_back(ia, nb.left);
            stack.emplace_back(ia, nb.right);
        } else if (nb.prim >= 0) {
            stack.emplace_back(na.left, ib);
            stack.emplace_back(na.right, ib);
        } else {
            stack.emplace_back(na.left, nb.left);
            stack.emplace_back(na.left, nb.right);
            stack.emplace_back(na.right, nb.left);
            stack.emplace_back(na.right, nb.right);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace gdyn
