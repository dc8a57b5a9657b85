//! Identifier newtypes shared by every module.

use std::borrow::Borrow;
use std::fmt;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Electrical node.
    NodeId
);
string_id!(SectionId);
string_id!(DeviceId);
string_id!(SourceId);
string_id!(GroundId);
string_id!(
    /// Phase zone (a utility grid synchronised to one phase timing).
    ZoneId
);
string_id!(TrackId);
string_id!(SwitchId);
string_id!(InterlockingId);
string_id!(PlateOrderId);
string_id!(RequestId);
string_id!(JobId);
string_id!(OrderId);
string_id!(
    /// Power Director or Dispatcher identity.
    PersonId
);
string_id!(
    /// Track id or feeder-group id; one operating order is written per line group.
    LineGroup
);
string_id!(Night);
