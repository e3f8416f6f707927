#pragma once

#include <stdexcept>
#include <string>

namespace wbis {

/// Base class for every error raised by the library.
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (empty input, p outside (0,1), ...).
class domain_error : public error
{
public:
    using error::error;
};

class insufficient_sample_error : public error
{
public:
    using error::error;
};

/// All samples identical; a normality test is undefined.
class degenerate_sample_error : public error
{
public:
    using error::error;
};

/// Nominal density positive where the proposal density vanishes.
class support_violation_error : public error
{
public:
    using error::error;
};

class config_error : public error
{
public:
    using error::error;
};

class fit_failure_error : public error
{
public:
    using error::error;
};

} // namespace wbis
