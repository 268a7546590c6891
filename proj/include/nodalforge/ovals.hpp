#pragma once

#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nodalforge {

// Configuration of disjoint ovals on the sphere, stored as a nesting forest.
// Oval i has parent[i] (or -1 for a top-level oval). Regions are numbered so
// that region 0 is the outer region and region i+1 is the inside of oval i.
class OvalConfig {
public:
    int add(std::string label, int parent = -1);

    int size() const { return static_cast<int>(labels_.size()); }
    bool empty() const { return labels_.empty(); }
    const std::string& label(int i) const { return labels_[i]; }
    const std::vector<std::string>& labels() const { return labels_; }
    int parent(int i) const { return parent_[i]; }
    std::vector<int> children(int i) const;
    std::vector<int> roots() const;
    int find(std::string_view label) const;  // -1 if absent
    int depth(int i) const;

    int region_count() const { return size() + 1; }
    // Region containing oval i on its outer side.
    int outer_region(int i) const { return parent_[i] + 1; }
    int inner_region(int i) const { return i + 1; }
    std::vector<std::vector<int>> region_adjacency() const;

    bool operator==(const OvalConfig&) const = default;

private:
    std::vector<std::string> labels_;
    std::vector<int> parent_;
};

enum class Color { White, Black };

struct TwoColoring {
    std::vector<Color> color;  // per region
};

TwoColoring canonical_two_coloring(const OvalConfig& config, Color outerColor);

// Canonical string of the unrooted region tree; equal strings iff equivalent.
std::string canonical_form(const OvalConfig& config);
bool is_equivalent(const OvalConfig& a, const OvalConfig& b);

// Deletes every oval not in keep; children of deleted ovals move up.
OvalConfig sub_configuration(const OvalConfig& config, const std::vector<int>& keep);

bool nicely_contains(const OvalConfig& x, const std::set<std::string>& ySubset);
bool nicely_contains_indices(const OvalConfig& x, const std::vector<int>& y);

OvalConfig parse_ovals(std::string_view text);
std::string to_string(const OvalConfig& config);   // bare forest, e.g. "A(B C(D))"
std::string format_ovals(const OvalConfig& config); // with the "format: 1" header

// All rooted nesting forests with exactly n ovals, one per isomorphism class.
std::vector<OvalConfig> enumerate_forests(int n);
OvalConfig random_config(int n, std::mt19937_64& rng);

}  // namespace nodalforge
