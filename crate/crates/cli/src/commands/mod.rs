pub mod orbit;
pub mod params;
pub mod scan;
pub mod sector;
pub mod solve;
