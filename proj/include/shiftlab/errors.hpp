#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace shiftlab {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainMismatch : Error {
    explicit DomainMismatch(const std::string& msg) : Error("domain mismatch: " + msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config: " + msg) {}
};

// density_core
struct DensityCollapse : Error {
    std::size_t set_index;
    DensityCollapse(std::size_t p, const std::string& msg)
        : Error("density collapse in set " + std::to_string(p) + ": " + msg), set_index(p) {}
};

struct GapInfeasible : Error {
    explicit GapInfeasible(const std::string& msg) : Error("gap infeasible: " + msg) {}
};

// shift_ops
struct OverflowAtIndex : Error {
    std::int64_t index;
    explicit OverflowAtIndex(std::int64_t k)
        : Error("weight product not representable at index " + std::to_string(k)), index(k) {}
};

// recurrence_lab
struct TargetOutsideFamily : Error {
    explicit TargetOutsideFamily(const std::string& msg) : Error("target outside family: " + msg) {}
};

// constructors
struct SeedNotRecurrentAtScale : Error {
    std::uint64_t level;
    explicit SeedNotRecurrentAtScale(std::uint64_t p)
        : Error("seed has empty or zero-density hitting family at level " + std::to_string(p)), level(p) {}
};

struct ScheduleExhausted : Error {
    std::uint64_t step;
    explicit ScheduleExhausted(std::uint64_t k)
        : Error("no admissible schedule point at step " + std::to_string(k)), step(k) {}
};

struct BudgetViolation : Error {
    std::uint64_t step;
    BudgetViolation(std::uint64_t k, const std::string& msg)
        : Error("budget violation at step " + std::to_string(k) + ": " + msg), step(k) {}
};

struct SeparationViolation : Error {
    explicit SeparationViolation(const std::string& msg) : Error("separation violation: " + msg) {}
};

struct SampleOutsideFamily : Error {
    explicit SampleOutsideFamily(const std::string& msg) : Error("sample outside family: " + msg) {}
};

struct CoverNotFound : Error {
    explicit CoverNotFound(const std::string& msg) : Error("cover not found: " + msg) {}
};

struct ApproximationNotFound : Error {
    std::size_t component;
    ApproximationNotFound(std::size_t l, const std::string& msg)
        : Error("approximation not found for component " + std::to_string(l) + ": " + msg), component(l) {}
};

// characterizations
struct ScheduleMismatch : Error {
    explicit ScheduleMismatch(const std::string& msg) : Error("schedule mismatch: " + msg) {}
};

struct UnboundedOperator : Error {
    explicit UnboundedOperator(const std::string& msg) : Error("operator norm bound diverges: " + msg) {}
};

}  // namespace shiftlab
