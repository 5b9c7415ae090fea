#pragma once

#include <stdexcept>
#include <string>

namespace cospec {

// Error taxonomy. `kind` maps onto process exit codes at the CLI boundary:
// Config -> 2, Budget -> 3, Operation -> 4.
enum class ErrorKind { Config, Budget, Operation };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), kind_(kind), name_(std::move(name)) {}
    ErrorKind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }

private:
    ErrorKind kind_;
    std::string name_;
};

#define COSPEC_ERROR(Name, Kind)                                             \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what)                               \
            : Error(ErrorKind::Kind, #Name, what) {}                         \
    }

COSPEC_ERROR(ConfigError, Config);
COSPEC_ERROR(InvalidArgument, Config);
COSPEC_ERROR(BudgetExceeded, Budget);
COSPEC_ERROR(SingularMatrix, Operation);
COSPEC_ERROR(IsometryInput, Operation);
COSPEC_ERROR(NonPositiveDeterminant, Operation);
COSPEC_ERROR(EmptyWord, Operation);
COSPEC_ERROR(EmptySignClass, Operation);
COSPEC_ERROR(InsufficientSupport, Operation);
COSPEC_ERROR(NonHyperbolicWord, Operation);
COSPEC_ERROR(DisjointInput, Operation);
COSPEC_ERROR(NotElliptic, Operation);

#undef COSPEC_ERROR

} // namespace cospec
