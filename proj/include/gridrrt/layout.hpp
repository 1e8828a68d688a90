#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "gridrrt/errors.hpp"

namespace gridrrt {

// A named contiguous index range inside a continuous state vector.
// `circular` marks angle variables interpreted modulo 2*pi.
struct Slice {
    std::string name;
    int offset = 0;
    int size = 0;
    bool circular = false;

    int end() const { return offset + size; }
};

// Partition of [0, dim) into named slices. Immutable after construction;
// every index must belong to exactly one slice.
class Layout {
public:
    Layout() = default;

    explicit Layout(std::vector<Slice> slices) : slices_(std::move(slices)) {
        std::sort(slices_.begin(), slices_.end(),
                  [](const Slice& a, const Slice& b) { return a.offset < b.offset; });
        int cursor = 0;
        for (const auto& s : slices_) {
            if (s.size < 0) throw ValidationError("layout: negative slice size for '" + s.name + "'");
            if (s.offset != cursor)
                throw ValidationError("layout: slice '" + s.name + "' leaves a gap or overlap at index " +
                                      std::to_string(cursor));
            for (const auto& other : slices_)
                if (&other != &s && other.name == s.name)
                    throw ValidationError("layout: duplicate slice name '" + s.name + "'");
            cursor = s.end();
        }
        dim_ = cursor;
    }

    int dim() const { return dim_; }

    bool has(std::string_view name) const {
        for (const auto& s : slices_)
            if (s.name == name) return true;
        return false;
    }

    const Slice& slice(std::string_view name) const {
        for (const auto& s : slices_)
            if (s.name == name) return s;
        throw ValidationError("layout: no slice named '" + std::string(name) + "'");
    }

    const std::vector<Slice>& slices() const { return slices_; }

    bool is_circular(int index) const {
        for (const auto& s : slices_)
            if (index >= s.offset && index < s.end()) return s.circular;
        throw ValidationError("layout: index out of range");
    }

    std::vector<int> circular_indices() const {
        std::vector<int> out;
        for (const auto& s : slices_)
            if (s.circular)
                for (int i = s.offset; i < s.end(); ++i) out.push_back(i);
        return out;
    }

private:
    std::vector<Slice> slices_;
    int dim_ = 0;
};

}  // namespace gridrrt
