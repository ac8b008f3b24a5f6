#ifndef FLATQUAD_ERRORS_HPP
#define FLATQUAD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace flatquad
{

    /// Base class of every error raised by the library.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Euler-rate map is singular (|cos(theta)| at or below tolerance).
    class GimbalLock : public Error
    {
    public:
        using Error::Error;
    };

    /// The mixer produced a negative squared rotor speed.
    class InfeasibleThrust : public Error
    {
    public:
        using Error::Error;
    };

    /// A rotor speed exceeds its configured limit.
    class Saturated : public Error
    {
    public:
        using Error::Error;
    };

    /// Thrust axis would point downward: zddot_3 + g <= 0.
    class DegenerateAcceleration : public Error
    {
    public:
        using Error::Error;
    };

    class IndexOutOfRange : public Error
    {
    public:
        using Error::Error;
    };

    class OrderTooHigh : public Error
    {
    public:
        using Error::Error;
    };

    /// Waypoint constraint matrix is rank deficient.
    class InfeasibleConstraints : public Error
    {
    public:
        InfeasibleConstraints(const std::string &what, int rank, int rows)
            : Error(what), rank_(rank), rows_(rows) {}

        int rank() const { return rank_; }
        int rows() const { return rows_; }

    private:
        int rank_;
        int rows_;
    };

    class SingularKKT : public Error
    {
    public:
        using Error::Error;
    };

    class LengthMismatch : public Error
    {
    public:
        using Error::Error;
    };

    /// Invalid argument or configuration value.
    class ValidationError : public Error
    {
    public:
        using Error::Error;
    };

    /// A controller or dynamics error raised during a rollout, tagged with the time it happened.
    class RolloutAborted : public Error
    {
    public:
        RolloutAborted(double t, const std::string &cause)
            : Error("rollout aborted at t=" + std::to_string(t) + " s: " + cause), time_(t) {}

        double time() const { return time_; }

    private:
        double time_;
    };

} // namespace flatquad

#endif
