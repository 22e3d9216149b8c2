//! Derived cost and energy parameters of the cement case study.
//!
//!     cargo run --example parameter_calculator

use supplyflex::scenario::{
    carbon_tax_to_penalty, cement_process_params, levelize, warehouse_cost_per_kg_hour, DEFAULT_EMISSION_FACTOR,
    HOURS_PER_YEAR, PUBLISHED_KILN_ENERGY_KWH,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("emission factor: {DEFAULT_EMISSION_FACTOR} kg CO2/kWh");
    for tax in [1.0, 50.0, 100.0, 250.0] {
        let k = carbon_tax_to_penalty(tax, DEFAULT_EMISSION_FACTOR)?;
        println!("  ${tax:>5}/t CO2 -> ${:.4}/kWh = ${:.2}/MWh", k, k * 1000.0);
    }

    // 150 t/h of clinker heated by 1400 °C at 0.92 kJ/(kg °C).
    let kiln = cement_process_params(150_000.0, 0.92, 1400.0)?;
    let gap = PUBLISHED_KILN_ENERGY_KWH / kiln.power_per_unit - 1.0;
    println!("\nkiln energy from m c dT: {:.1} kWh per hour of throughput", kiln.power_per_unit);
    println!(
        "published case-study value: {PUBLISHED_KILN_ENERGY_KWH:.0} kWh ({:+.2}%); fixtures use the published value",
        gap * 100.0
    );

    println!("\nlevelized capital rates:");
    println!("  truck     ${:.4}/h   ($150k over 30 y)", levelize(150_000.0, 30.0)?);
    println!("  kiln      ${:.4}/h   ($25k over 40 y)", levelize(25_000.0, 40.0)?);
    let ware = warehouse_cost_per_kg_hour(4645.0, 9.88, 1440.0, 1_150_000.0, 30.0)?;
    println!("  warehouse ${ware:.3e}/(kg h)");
    let batt = 400.0 / (5.0 * HOURS_PER_YEAR);
    println!("  battery   ${batt:.3e}/(kWh h) = ${:.3}/kWh per week", batt * 168.0);
    Ok(())
}
