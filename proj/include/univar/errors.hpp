#ifndef UNIVAR_ERRORS_HPP
#define UNIVAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace univar {

// All domain failures derive from Error so the CLI can map them to exit 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define UNIVAR_DEFINE_ERROR(Name)            \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  };

UNIVAR_DEFINE_ERROR(ParseError)
UNIVAR_DEFINE_ERROR(ClientError)
UNIVAR_DEFINE_ERROR(RosterError)
UNIVAR_DEFINE_ERROR(SchemaError)
UNIVAR_DEFINE_ERROR(IOError)
UNIVAR_DEFINE_ERROR(InsufficientPool)
UNIVAR_DEFINE_ERROR(InsufficientCorpus)
UNIVAR_DEFINE_ERROR(DanglingReference)
UNIVAR_DEFINE_ERROR(DimensionError)
UNIVAR_DEFINE_ERROR(NonFiniteLoss)
UNIVAR_DEFINE_ERROR(EmptyReference)
UNIVAR_DEFINE_ERROR(EmptyQueries)
UNIVAR_DEFINE_ERROR(LabelMismatch)
UNIVAR_DEFINE_ERROR(EmptyText)
UNIVAR_DEFINE_ERROR(EmptyGroup)
UNIVAR_DEFINE_ERROR(UnknownValueID)
UNIVAR_DEFINE_ERROR(DegenerateData)
UNIVAR_DEFINE_ERROR(FormatError)
UNIVAR_DEFINE_ERROR(SidecarMismatch)
UNIVAR_DEFINE_ERROR(ConfigError)

#undef UNIVAR_DEFINE_ERROR

}  // namespace univar

#endif
