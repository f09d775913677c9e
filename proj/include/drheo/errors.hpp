#ifndef DRHEO_ERRORS_HPP
#define DRHEO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace drheo {

enum class error_kind {
    config,     // invalid configuration or model parameters
    domain,     // non-finite or out-of-domain numeric input
    stability,  // time step above the stability limit
    sequence,   // records supplied out of order
    io,         // file read/write failure
};

class error : public std::runtime_error {
  public:
    error(error_kind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    error_kind kind() const { return kind_; }

  private:
    error_kind kind_;
};

[[noreturn]] inline void fail(error_kind kind, const std::string& msg) {
    throw error(kind, msg);
}

} // namespace drheo

#endif
