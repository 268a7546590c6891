#include "nodalforge/ovals.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>

namespace nodalforge {

int OvalConfig::add(std::string label, int parent)
{
    if (parent < -1 || parent >= size())
        throw std::invalid_argument("oval parent out of range");
    if (find(label) >= 0)
        throw std::invalid_argument("duplicate oval label '" + label + "'");
    labels_.push_back(std::move(label));
    parent_.push_back(parent);
    return size() - 1;
}

std::vector<int> OvalConfig::children(int i) const
{
    std::vector<int> out;
    for (int j = 0; j < size(); ++j)
        if (parent_[j] == i) out.push_back(j);
    return out;
}

std::vector<int> OvalConfig::roots() const { return children(-1); }

int OvalConfig::find(std::string_view label) const
{
    for (int i = 0; i < size(); ++i)
        if (labels_[i] == label) return i;
    return -1;
}

int OvalConfig::depth(int i) const
{
    int d = 0;
    for (int p = parent_[i]; p >= 0; p = parent_[p]) ++d;
    return d;
}

std::vector<std::vector<int>> OvalConfig::region_adjacency() const
{
    std::vector<std::vector<int>> adj(region_count());
    for (int i = 0; i < size(); ++i) {
        int a = outer_region(i), b = inner_region(i);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

TwoColoring canonical_two_coloring(const OvalConfig& config, Color outerColor)
{
    TwoColoring c;
    c.color.assign(config.region_count(), outerColor);
    for (int i = 0; i < config.size(); ++i) {
        bool odd = (config.depth(i) % 2) == 0;  // inside of a depth-0 oval is at region depth 1
        if (odd) c.color[config.inner_region(i)] = outerColor == Color::White ? Color::Black : Color::White;
    }
    return c;
}

namespace {

// AHU encoding of a tree given as adjacency lists, rooted at r. Iterative so
// that deep chains do not exhaust the stack.
std::string rooted_encoding(const std::vector<std::vector<int>>& adj, int r)
{
    int n = static_cast<int>(adj.size());
    std::vector<int> parent(n, -1), order;
    order.reserve(n);
    std::vector<int> stack{r};
    parent[r] = r;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        order.push_back(v);
        for (int w : adj[v])
            if (parent[w] == -1) {
                parent[w] = v;
                stack.push_back(w);
            }
    }
    std::vector<std::vector<std::string>> kids(n);
    std::vector<std::string> enc(n);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int v = *it;
        auto& k = kids[v];
        std::sort(k.begin(), k.end());
        std::string s = "(";
        for (auto& c : k) s += c;
        s += ")";
        k.clear();
        k.shrink_to_fit();
        if (v == r) return s;
        kids[parent[v]].push_back(std::move(s));
    }
    return {};
}

std::vector<int> tree_centers(const std::vector<std::vector<int>>& adj)
{
    int n = static_cast<int>(adj.size());
    if (n <= 2) {
        std::vector<int> all(n);
        for (int i = 0; i < n; ++i) all[i] = i;
        return all;
    }
    std::vector<int> deg(n), layer;
    for (int v = 0; v < n; ++v) {
        deg[v] = static_cast<int>(adj[v].size());
        if (deg[v] <= 1) layer.push_back(v);
    }
    int remaining = n;
    while (remaining > 2) {
        remaining -= static_cast<int>(layer.size());
        std::vector<int> next;
        for (int v : layer)
            for (int w : adj[v])
                if (--deg[w] == 1) next.push_back(w);
        layer = std::move(next);
    }
    return layer;
}

}  // namespace

std::string canonical_form(const OvalConfig& config)
{
    auto adj = config.region_adjacency();
    std::string best;
    for (int c : tree_centers(adj)) {
        std::string s = rooted_encoding(adj, c);
        if (best.empty() || s < best) best = std::move(s);
    }
    return best;
}

bool is_equivalent(const OvalConfig& a, const OvalConfig& b)
{
    if (a.size() != b.size()) return false;
    return canonical_form(a) == canonical_form(b);
}

OvalConfig sub_configuration(const OvalConfig& config, const std::vector<int>& keep)
{
    std::vector<char> kept(config.size(), 0);
    for (int i : keep) {
        if (i < 0 || i >= config.size()) throw std::invalid_argument("oval index out of range");
        kept[i] = 1;
    }
    // Parents precede children after a depth sort, which add() requires.
    std::vector<int> order;
    for (int i = 0; i < config.size(); ++i)
        if (kept[i]) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return config.depth(a) < config.depth(b); });
    OvalConfig out;
    std::vector<int> newIndex(config.size(), -1);
    for (int i : order) {
        int p = config.parent(i);
        while (p >= 0 && !kept[p]) p = config.parent(p);
        newIndex[i] = out.add(config.label(i), p >= 0 ? newIndex[p] : -1);
    }
    return out;
}

bool nicely_contains_indices(const OvalConfig& x, const std::vector<int>& y)
{
    std::vector<char> inY(x.size(), 0);
    for (int i : y) {
        if (i < 0 || i >= x.size()) throw std::invalid_argument("oval index out of range");
        inY[i] = 1;
    }
    int parity = -1;
    for (int i : y) {
        int d = 0;
        for (int p = x.parent(i); p >= 0; p = x.parent(p))
            if (!inY[p]) ++d;
        if (parity < 0) parity = d % 2;
        else if (parity != d % 2) return false;
    }
    return true;
}

bool nicely_contains(const OvalConfig& x, const std::set<std::string>& ySubset)
{
    std::vector<int> y;
    for (auto& l : ySubset) {
        int i = x.find(l);
        if (i < 0) throw std::invalid_argument("unknown oval label '" + l + "'");
        y.push_back(i);
    }
    return nicely_contains_indices(x, y);
}

namespace {

class OvalParser {
public:
    explicit OvalParser(std::string_view s) : s_(s) {}

    OvalConfig run()
    {
        skip_header();
        forest(-1);
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected character");
        // Auto labels, chosen to avoid user labels.
        int counter = 0;
        for (auto& p : pending_) {
            if (p.label.empty()) {
                std::string l;
                do l = "o" + std::to_string(++counter);
                while (std::any_of(pending_.begin(), pending_.end(), [&](auto& q) { return q.label == l; }));
                p.label = l;
            }
        }
        OvalConfig c;
        for (auto& p : pending_) c.add(p.label, p.parent);
        return c;
    }

private:
    struct Pending {
        std::string label;
        int parent;
    };

    [[noreturn]] void fail(const std::string& what) const
    {
        throw std::invalid_argument("ovals parse error at offset " + std::to_string(pos_) + ": " + what);
    }

    void skip_ws()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    void skip_header()
    {
        skip_ws();
        constexpr std::string_view key = "format:";
        if (s_.substr(pos_, key.size()) != key) return;
        pos_ += key.size();
        skip_ws();
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (s_.substr(start, pos_ - start) != "1") fail("unsupported format version");
    }

    static bool label_char(char c)
    {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    }

    void forest(int parent)
    {
        for (;;) {
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] == ')') return;
            std::string label;
            while (pos_ < s_.size() && label_char(s_[pos_])) label += s_[pos_++];
            skip_ws();
            bool open = pos_ < s_.size() && s_[pos_] == '(';
            if (label.empty() && !open) fail("expected label or '('");
            if (!label.empty())
                for (auto& p : pending_)
                    if (p.label == label) fail("duplicate label '" + label + "'");
            int me = static_cast<int>(pending_.size());
            pending_.push_back({label, parent});
            if (open) {
                ++pos_;
                forest(me);
                skip_ws();
                if (pos_ >= s_.size() || s_[pos_] != ')') fail("missing ')'");
                ++pos_;
            }
        }
    }

    std::string_view s_;
    size_t pos_ = 0;
    std::vector<Pending> pending_;
};

void write_forest(const OvalConfig& c, int parent, std::string& out)
{
    bool first = true;
    for (int i : c.children(parent)) {
        if (!first) out += ' ';
        first = false;
        out += c.label(i);
        auto kids = c.children(i);
        if (!kids.empty()) {
            out += '(';
            write_forest(c, i, out);
            out += ')';
        }
    }
}

}  // namespace

OvalConfig parse_ovals(std::string_view text) { return OvalParser(text).run(); }

std::string to_string(const OvalConfig& config)
{
    std::string out;
    write_forest(config, -1, out);
    return out;
}

std::string format_ovals(const OvalConfig& config) { return "format: 1\n" + to_string(config) + "\n"; }

namespace {

std::string label_for(int i)
{
    std::string s(1, static_cast<char>('A' + i % 26));
    if (i >= 26) s += std::to_string(i / 26);
    return s;
}

// Rooted trees as parent arrays (node 0 is the root).
std::vector<std::vector<int>> rooted_trees(int nodes)
{
    std::vector<std::vector<int>> level{{-1}};
    for (int k = 2; k <= nodes; ++k) {
        std::map<std::string, std::vector<int>> seen;
        for (auto& t : level)
            for (int v = 0; v < static_cast<int>(t.size()); ++v) {
                auto u = t;
                u.push_back(v);
                std::vector<std::vector<int>> adj(u.size());
                for (int i = 1; i < static_cast<int>(u.size()); ++i) {
                    adj[i].push_back(u[i]);
                    adj[u[i]].push_back(i);
                }
                seen.emplace(rooted_encoding(adj, 0), std::move(u));
            }
        level.clear();
        for (auto& [_, t] : seen) level.push_back(std::move(t));
    }
    return level;
}

}  // namespace

std::vector<OvalConfig> enumerate_forests(int n)
{
    if (n < 0) throw std::invalid_argument("negative oval count");
    std::vector<OvalConfig> out;
    for (auto& t : rooted_trees(n + 1)) {
        // Tree node i >= 1 becomes oval i-1; node 0 is the outer region.
        OvalConfig c;
        for (int i = 1; i <= n; ++i) c.add(label_for(i - 1), t[i] == 0 ? -1 : t[i] - 1);
        out.push_back(std::move(c));
    }
    return out;
}

OvalConfig random_config(int n, std::mt19937_64& rng)
{
    OvalConfig c;
    for (int i = 0; i < n; ++i) {
        std::uniform_int_distribution<int> pick(-1, i - 1);
        c.add(label_for(i), pick(rng));
    }
    return c;
}

}  // namespace nodalforge
