#pragma once

#include <stdexcept>
#include <string>

namespace mtdc {

// Base class for every recoverable failure raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// densela
struct SingularMatrix : Error {
    explicit SingularMatrix(const std::string& msg) : Error(msg) {}
};
struct NotSymmetric : Error {
    explicit NotSymmetric(const std::string& msg) : Error(msg) {}
};
struct NoConvergence : Error {
    explicit NoConvergence(const std::string& msg) : Error(msg) {}
};

// netgraph
struct InvalidGraph : Error {
    explicit InvalidGraph(const std::string& msg) : Error(msg) {}
};
struct DisconnectedGraph : Error {
    explicit DisconnectedGraph(const std::string& msg) : Error(msg) {}
};

// plant
struct InvalidParams : Error {
    explicit InvalidParams(const std::string& msg) : Error(msg) {}
};
struct MissingCommGraph : Error {
    explicit MissingCommGraph(const std::string& msg) : Error(msg) {}
};
struct VoltageCollapse : Error {
    explicit VoltageCollapse(const std::string& msg) : Error(msg) {}
};

// analysis
struct SingularSystem : Error {
    explicit SingularSystem(const std::string& msg) : Error(msg) {}
};
struct NonUniformGains : Error {
    explicit NonUniformGains(const std::string& msg) : Error(msg) {}
};
struct NotConverged : Error {
    explicit NotConverged(const std::string& msg) : Error(msg) {}
};

// sim
struct StepSizeUnstable : Error {
    explicit StepSizeUnstable(const std::string& msg) : Error(msg) {}
};

// cli / scenario files
struct ScenarioError : Error {
    explicit ScenarioError(const std::string& msg) : Error(msg) {}
};

} // namespace mtdc
