//! A two-hole comb: the input is copied, one copy runs through both holes,
//! and the result is compared with the kept copy.

use catsec::resource::{contract_with_fillers, Comb};
use catsec::{compose, Morphism, WireList};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bit = WireList::from_sizes(&[2])?;
    let two = bit.concat(&bit);
    let xor = Morphism::deterministic(two.clone(), bit.clone(), |x| (x >> 1) ^ (x & 1))?;
    let comb = Comb::sequential(
        vec![(bit.clone(), bit.clone()), (bit.clone(), bit.clone())],
        vec![Morphism::copy(&bit), Morphism::identity(&two), xor],
        (bit.clone(), bit.clone()),
    )?;

    let not = Morphism::deterministic(bit.clone(), bit.clone(), |x| 1 - x)?;
    let flip = Morphism::stochastic(bit.clone(), bit.clone(), vec![0.8, 0.2, 0.2, 0.8])?;
    let plugged = comb.plug(&[not.clone(), flip.clone()])?;
    println!("did the bit change? {:?}", plugged.matrix());

    let pt = comb.process_tensor()?;
    let again = contract_with_fillers(&comb, &pt, &[not.clone(), flip.clone()])?;
    println!(
        "process tensor {}x{}, agrees with plugging: {}",
        pt.rows(),
        pt.cols(),
        again == plugged
    );

    // nesting a sequential pair into the first hole
    let inner = Comb::sequential(
        vec![(bit.clone(), bit.clone())],
        vec![Morphism::identity(&bit), Morphism::identity(&bit)],
        (bit.clone(), bit.clone()),
    )?;
    let nested = comb.nest(&[inner, Comb::identity(&bit, &bit)])?;
    let direct = comb.plug(&[compose(&not, &Morphism::identity(&bit))?, flip.clone()])?;
    println!("nested comb plugs the same: {}", nested.plug(&[not, flip])? == direct);
    Ok(())
}
