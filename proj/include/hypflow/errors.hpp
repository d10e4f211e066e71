#pragma once

#include <stdexcept>
#include <string>

namespace hypflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidField : Error { using Error::Error; };
struct InvalidArgument : Error { using Error::Error; };
struct SingularPoint : Error { using Error::Error; };
struct AxisPoint : Error { using Error::Error; };
struct StepRejected : Error { using Error::Error; };
struct UnderResolvedBox : Error { using Error::Error; };
struct PreconditionFailed : Error { using Error::Error; };
struct PreconditionNotChecked : Error { using Error::Error; };
struct DegenerateField : Error { using Error::Error; };
struct FileError : Error { using Error::Error; };

} // namespace hypflow
