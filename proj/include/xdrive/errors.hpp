#pragma once

#include <stdexcept>
#include <string>

namespace xdrive {

// Base for every error the library raises. Subclasses name the failure so
// callers (and the CLI) can map them to messages and exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch : public Error { public: using Error::Error; };
class InvalidArgument : public Error { public: using Error::Error; };
class InvalidP : public InvalidArgument { public: using InvalidArgument::InvalidArgument; };
class InvalidDt : public InvalidArgument { public: using InvalidArgument::InvalidArgument; };
class InvalidConfig : public InvalidArgument { public: using InvalidArgument::InvalidArgument; };
class InvalidTrack : public Error { public: using Error::Error; };
class InvalidNode : public Error { public: using Error::Error; };
class NoPath : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class FormatError : public Error { public: using Error::Error; };
class BufferTooSmall : public Error { public: using Error::Error; };
class RolloutFailed : public Error { public: using Error::Error; };
class InsufficientFrames : public Error { public: using Error::Error; };
class EmptyQuestion : public Error { public: using Error::Error; };
class UnknownAnswer : public Error { public: using Error::Error; };
class MissingPrerequisite : public Error { public: using Error::Error; };

}  // namespace xdrive
