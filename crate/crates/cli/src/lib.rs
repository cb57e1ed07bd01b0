//! Library side of the `btoep` command-line tool: the JSON symbol schema and
//! the report serializers, usable programmatically as well.

pub mod schema;
