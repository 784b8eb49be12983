//! Conversions between the engineering units used in scenario files and the
//! SI base units used internally (bits, bits/s, cycles, Hz, W, J, s).

pub const GIGA: f64 = 1e9;

pub fn ghz_to_hz(ghz: f64) -> f64 {
    ghz * GIGA
}

pub fn gbps_to_bps(gbps: f64) -> f64 {
    gbps * GIGA
}

pub fn gbit_to_bit(gbit: f64) -> f64 {
    gbit * GIGA
}

pub fn bit_to_gbit(bit: f64) -> f64 {
    bit / GIGA
}

/// `dBm` to watts; 30 dBm is exactly 1 W.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Cycles per Gbit (the customary unit) to cycles per bit.
pub fn cycles_per_gbit_to_per_bit(c: f64) -> f64 {
    c / GIGA
}

/// Default processing density: 10^6 cycles per Gbit.
pub const DEFAULT_CYCLES_PER_BIT: f64 = 1e6 / GIGA;
