//! C ABI for the ginue-lab library. Placeholder during bring-up; the full
//! surface (opaque handles, error codes, header generation) lands with the
//! core modules.
