#pragma once

#include <stdexcept>
#include <string>

namespace gdyn {

struct MalformedAsset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateElement : std::runtime_error {
    int index;
    explicit DegenerateElement(int idx_, const std::string& what_)
        : std::runtime_error(what_), index(idx_)
    {
    }
};

struct UnknownPreset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonManifold : std::runtime_error {
    int edge_v0, edge_v1;
    NonManifold(int a, int b, const std::string& what_)
        : std::runtime_error(what_), edge_v0(a), edge_v1(b)
    {
    }
};

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularBlock : std::runtime_error {
    int level, block;
    SingularBlock(int level_, int block_, const std::string& what_)
        : std::runtime_error(what_), level(level_), block(block_)
    {
    }
};

struct UntangleFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyPointSet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateRegistration : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoOverlap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidScript : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gdyn
