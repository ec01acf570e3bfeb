#pragma once

#include <stdexcept>
#include <string>

namespace nfpca {

struct invalid_dimension : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct singular_system : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct training_aborted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace nfpca
