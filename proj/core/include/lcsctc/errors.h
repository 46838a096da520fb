// lcsctc/errors.h
//
// Exception types thrown by the library. Everything derives from
// lcsctc::Error so callers can catch the whole family at once; the CLI maps
// any Error to exit status 2.

#ifndef LCSCTC_ERRORS_H_
#define LCSCTC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace lcsctc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text or file. When the input is line oriented the message
// carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string &what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

// An argument outside the domain of the operation (blank passed to the
// similarity function, sigma <= 0, unknown label, shape mismatch, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The target sequence cannot be emitted in the available number of frames.
class InfeasibleError : public Error {
 public:
  InfeasibleError(int required_frames, int num_frames)
      : Error("target needs at least " + std::to_string(required_frames) +
              " frames but only " + std::to_string(num_frames) +
              " are available"),
        required_frames_(required_frames),
        num_frames_(num_frames) {}

  int required_frames() const { return required_frames_; }
  int num_frames() const { return num_frames_; }

 private:
  int required_frames_;
  int num_frames_;
};

}  // namespace lcsctc

#endif  // LCSCTC_ERRORS_H_
