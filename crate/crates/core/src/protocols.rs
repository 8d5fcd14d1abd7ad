//! Worked instances: the one-time pad and Diffie-Hellman key exchange.

use crate::finstoch::{compose, tensor, tensor_all, Morphism, Structural, WireList};
use crate::grouphopf::{action_generators, group_generators, FiniteGroup, GroupError};
use crate::resource::{Dir, PartiteResource, PartyStrategy, Port, Protocol, ResourceError};

pub const ALICE: &str = "Alice";
pub const BOB: &str = "Bob";
pub const EVE: &str = "Eve";

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error(transparent)]
    FinStoch(#[from] crate::finstoch::FinStochError),
}

fn three() -> Vec<String> {
    vec![ALICE.into(), BOB.into(), EVE.into()]
}

fn unit_id() -> Morphism {
    Morphism::identity(&WireList::unit())
}

/// `sender` inputs a value of size `n`; every receiver gets a copy.
pub fn broadcast(
    parties: &[String],
    sender: &str,
    receivers: &[&str],
    n: usize,
) -> Result<PartiteResource, ResourceError> {
    let mut ports = vec![Port::new(sender, Dir::In, 1, n)];
    ports.extend(receivers.iter().map(|r| Port::new(r, Dir::Out, 1, n)));
    let x = WireList::from_sizes(&[n])?;
    let kernel = copies(&x, receivers.len());
    PartiteResource::new(parties.to_vec(), ports, kernel)
}

/// A uniformly random value of size `n` handed to each holder.
pub fn shared_key(parties: &[String], holders: &[&str], n: usize) -> Result<PartiteResource, ResourceError> {
    let ports = holders.iter().map(|h| Port::new(h, Dir::Out, 1, n)).collect();
    let x = WireList::from_sizes(&[n])?;
    let kernel = compose(&copies(&x, holders.len()), &Morphism::uniform(&x))?;
    PartiteResource::new(parties.to_vec(), ports, kernel)
}

/// `from` inputs a value of size `n` that only `to` receives.
pub fn secure_channel(parties: &[String], from: &str, to: &str, n: usize) -> Result<PartiteResource, ResourceError> {
    broadcast(parties, from, &[to], n)
}

/// `X → X^{⊗k}`, with `k = 0` deleting.
fn copies(x: &WireList, k: usize) -> Morphism {
    match k {
        0 => Morphism::delete(x),
        1 => Morphism::identity(x),
        _ => {
            let mut m = Morphism::copy(x);
            for i in 2..k {
                m = m.then_at(&Morphism::copy(x), i - 1).expect("copy chain");
            }
            m
        }
    }
}

#[derive(Clone, Debug)]
pub struct OtpInstance {
    pub group: FiniteGroup,
    pub protocol: Protocol,
}

impl OtpInstance {
    /// Alice's encryption step: message and key to ciphertext `m·k`.
    pub fn alice_piece(&self) -> &Morphism {
        &self.protocol.strategies()[0].stages[1]
    }

    /// Bob's decryption step: ciphertext and key to `c·k⁻¹`.
    pub fn bob_piece(&self) -> &Morphism {
        &self.protocol.strategies()[1].stages[2]
    }
}

/// The one-time pad over `g`.
///
/// The source is a shared key for Alice and Bob (round 1) followed by
/// Alice's authenticated broadcast to Bob and Eve (round 2); the target is
/// a channel from Alice to Bob that Eve cannot see.
pub fn build_otp(g: &FiniteGroup) -> Result<OtpInstance, InstanceError> {
    let parties = three();
    let n = g.order();
    let key = shared_key(&parties, &[ALICE, BOB], n)?;
    let bcast = broadcast(&parties, ALICE, &[BOB, EVE], n)?;
    let source = key.seq_tensor(&bcast);
    let target = secure_channel(&parties, ALICE, BOB, n)?;
    let gens = group_generators(g);
    let x = g.wires();
    let id = Morphism::identity(&x);
    let swap = Morphism::structural(&Structural::Swap, &x.concat(&x))?;
    // stage 1 sees (key, message)
    let encrypt = compose(&gens.mult, &swap)?;
    let decrypt = compose(&gens.mult, &tensor(&id, &gens.inv))?;
    let alice = PartyStrategy::new(vec![id.clone(), encrypt, unit_id()]);
    let bob = PartyStrategy::new(vec![unit_id(), id.clone(), decrypt]);
    let eve = PartyStrategy::new(vec![unit_id(), unit_id(), Morphism::delete(&x)]);
    let protocol = Protocol::new(source, target, vec![vec![1, 2]], vec![alice, bob, eve])?;
    Ok(OtpInstance {
        group: g.clone(),
        protocol,
    })
}

/// Alice broadcasts her message in the clear; the key is never used.
pub fn build_plaintext_leak(g: &FiniteGroup) -> Result<Protocol, InstanceError> {
    let parties = three();
    let n = g.order();
    let source = broadcast(&parties, ALICE, &[BOB, EVE], n)?;
    let target = secure_channel(&parties, ALICE, BOB, n)?;
    let x = g.wires();
    let alice = PartyStrategy::new(vec![Morphism::identity(&x), unit_id()]);
    let bob = PartyStrategy::new(vec![unit_id(), Morphism::identity(&x)]);
    let eve = PartyStrategy::new(vec![unit_id(), Morphism::delete(&x)]);
    Ok(Protocol::new(source, target, vec![vec![1]], vec![alice, bob, eve])?)
}

/// The pad with the key applied and immediately removed again: the
/// ciphertext is the message.
pub fn build_broken_otp(g: &FiniteGroup) -> Result<Protocol, InstanceError> {
    let otp = build_otp(g)?;
    let x = g.wires();
    let gens = group_generators(g);
    // (k, m) -> m·k·k⁻¹ = m
    let k_kinv = compose(&tensor(&Morphism::identity(&x), &gens.inv), &Morphism::copy(&x))?;
    let pad = compose(&gens.mult, &k_kinv)?;
    let leak = compose(&gens.mult, &tensor(&Morphism::identity(&x), &pad))?;
    let swap = Morphism::structural(&Structural::Swap, &x.concat(&x))?;
    let encrypt = compose(&leak, &swap)?;
    let decrypt = tensor(&Morphism::identity(&x), &Morphism::delete(&x));
    let p = &otp.protocol;
    let mut strategies = p.strategies().to_vec();
    strategies[0].stages[1] = encrypt;
    strategies[1].stages[2] = decrypt;
    Ok(Protocol::new(
        p.source().clone(),
        p.target().clone(),
        p.schedule().to_vec(),
        strategies,
    )?)
}

#[derive(Clone, Debug)]
pub struct DhkeInstance {
    pub group: FiniteGroup,
    pub generator: usize,
    pub protocol: Protocol,
}

/// Diffie-Hellman key exchange over the cyclic group `g` with generator
/// `g_index`.
///
/// The source is two broadcast channels in the same round, one from Alice
/// and one from Bob, each heard by the other and by Eve; the target is a
/// uniformly random key shared by Alice and Bob.
pub fn build_dhke(g: &FiniteGroup, g_index: usize) -> Result<DhkeInstance, InstanceError> {
    let parties = three();
    let n = g.order();
    let ga = broadcast(&parties, ALICE, &[BOB, EVE], n)?;
    let gb = broadcast(&parties, BOB, &[ALICE, EVE], n)?;
    let source = ga.tensor(&gb);
    let target = shared_key(&parties, &[ALICE, BOB], n)?;
    let zn = crate::finstoch::FinSet::new(n)?;
    let act = action_generators(&zn, g, g_index)?;
    let x = g.wires();
    let zw = WireList::single(zn);
    // I -> G ⊗ Z_n: sample a, publish g^a, keep a
    let to_ga = compose(&act.act, &tensor(&Morphism::identity(&zw), &act.gen_point))?;
    let first = compose(
        &tensor(&to_ga, &Morphism::identity(&zw)),
        &compose(&Morphism::copy(&zw), &act.exp_rand)?,
    )?;
    // G ⊗ Z_n -> G: (h, a) -> h^a
    let swap = Morphism::structural(&Structural::Swap, &x.concat(&zw))?;
    let second = compose(&act.act, &swap)?;
    let party = PartyStrategy::new(vec![first, second]);
    let eve = PartyStrategy::new(vec![unit_id(), Morphism::delete(&x.concat(&x))]);
    let protocol = Protocol::new(source, target, vec![vec![1]], vec![party.clone(), party, eve])?;
    Ok(DhkeInstance {
        group: g.clone(),
        generator: g_index,
        protocol,
    })
}

/// Exact total variation between `(g^a, g^b, g^ab)` and `(g^a, g^b, g^c)`
/// for uniform exponents in `Z_n`, `n = |G|`.
pub fn ddh_tv_advantage(g: &FiniteGroup, g_index: usize) -> Result<f64, InstanceError> {
    let n = g.order();
    if !g.generates(g_index) {
        return Err(GroupError::NotGenerator(g_index).into());
    }
    let mut real = vec![0.0; n * n * n];
    let mut ideal = vec![0.0; n * n * n];
    let (w2, w3) = (1.0 / (n * n) as f64, 1.0 / (n * n * n) as f64);
    let pw: Vec<usize> = (0..n).map(|a| g.pow(g_index, a)).collect();
    for a in 0..n {
        for b in 0..n {
            let head = (pw[a] * n + pw[b]) * n;
            real[head + pw[a * b % n]] += w2;
            for c in 0..n {
                ideal[head + pw[c]] += w3;
            }
        }
    }
    Ok(0.5 * real.iter().zip(&ideal).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// All copies of a kernel that `protocols` uses to broadcast `n` values to
/// `k` receivers; exposed for diagram checks.
pub fn fan_out(n: usize, k: usize) -> Result<Morphism, InstanceError> {
    Ok(copies(&WireList::from_sizes(&[n])?, k))
}

/// Tensor of `k` uniform states on `n` elements.
pub fn uniform_states(n: usize, k: usize) -> Result<Morphism, InstanceError> {
    let u = Morphism::uniform(&WireList::from_sizes(&[n])?);
    Ok(tensor_all(std::iter::repeat(&u).take(k)))
}
