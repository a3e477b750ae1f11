//! Message passing between overlapping cells.
//!
//! Each cell sends, for every shared slot, the distribution of that qubit's
//! letter implied by its own syndrome and the messages on its other slots,
//! with the qubit's own prior divided out. The receiving cell multiplies the
//! message into its prior for the same physical qubit.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::cell::{LevelLayout, CELL_QUBITS, SHARED_SLOTS};
use crate::engine::Plan;
use crate::noise::ErrorModel;

pub type Message = [f64; 4];
pub type CellMessages = [Message; SHARED_SLOTS];

const UNIFORM: Message = [0.25; 4];

/// Incoming messages of every cell, indexed by the layout's shared order.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageSet {
    pub round: usize,
    pub incoming: Vec<CellMessages>,
}

/// Uniform messages for `cells` cells at round 0.
pub fn init_messages(cells: usize) -> MessageSet {
    MessageSet {
        round: 0,
        incoming: vec![[UNIFORM; SHARED_SLOTS]; cells],
    }
}

/// Per-round summary of a message update.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoundStats {
    /// Largest total-variation change of any message.
    pub max_change: f64,
    /// Mean total-variation change over all messages.
    pub mean_change: f64,
    /// Outgoing messages that vanished and were replaced by uniform.
    pub zero_messages: usize,
}

/// Slot weights carrying the incoming messages; unshared slots get ones.
pub fn slot_weights(layout: &LevelLayout, incoming: &CellMessages) -> [[f64; 4]; CELL_QUBITS] {
    let mut w = [[1.0; 4]; CELL_QUBITS];
    for (k, sh) in layout.shared.iter().enumerate() {
        w[sh.slot] = incoming[k];
    }
    w
}

fn normalize(v: Message) -> Option<Message> {
    let s: f64 = v.iter().sum();
    (s > 0.0 && s.is_finite()).then(|| v.map(|x| x / s))
}

/// Outgoing messages and reweighted posterior marginals on the shared slots
/// of one cell.
#[derive(Clone, Debug)]
pub struct CellUpdate {
    pub outgoing: CellMessages,
    pub posterior: CellMessages,
    pub zero_messages: usize,
}

/// Computes one cell's outgoing messages.
///
/// For a slot in a single-qubit factor the message is the cavity sum over
/// all other factors (own prior and own message excluded). For a slot in a
/// pair factor the partner letter is summed with the pair's joint and the
/// partner's message, and the slot's prior marginal is divided out, with
/// `0/0` read as `0`.
pub fn cell_update(
    layout: &LevelLayout,
    plan: &Plan,
    model: &ErrorModel,
    syndrome: u8,
    incoming: &CellMessages,
) -> CellUpdate {
    let sw = slot_weights(layout, incoming);
    let base = plan.weights(model, None);
    let w = plan.weights(model, Some(&sw));
    let sweep = plan.sweep(&w, syndrome);
    let mut outgoing = [UNIFORM; SHARED_SLOTS];
    let mut posterior = [UNIFORM; SHARED_SLOTS];
    let mut zero_messages = 0;
    for (k, sh) in layout.shared.iter().enumerate() {
        let q = sh.slot;
        let fi = plan.factor_of[q];
        let f = &plan.factors[fi];
        let cav = sweep.cavity(plan, fi);
        let mut out = [0.0; 4];
        let mut post = [0.0; 4];
        if !f.paired {
            for a in 0..4 {
                if base[fi][a] > 0.0 {
                    out[a] = cav[a];
                }
                post[a] = cav[a] * w[fi][a];
            }
        } else {
            let pos = if f.slots[0] == q { 0 } else { 1 };
            let r = f.slots[1 - pos];
            let mut prior = [0.0; 4];
            for b in 0..4 {
                for a in 0..4 {
                    let c = a + 4 * b;
                    let (mine, theirs) = if pos == 0 { (a, b) } else { (b, a) };
                    out[mine] += cav[c] * base[fi][c] * sw[r][theirs];
                    prior[mine] += base[fi][c];
                    post[mine] += cav[c] * w[fi][c];
                }
            }
            for a in 0..4 {
                out[a] = if prior[a] > 0.0 { out[a] / prior[a] } else { 0.0 };
            }
        }
        outgoing[k] = normalize(out).unwrap_or_else(|| {
            zero_messages += 1;
            UNIFORM
        });
        posterior[k] = normalize(post).unwrap_or(UNIFORM);
    }
    CellUpdate {
        outgoing,
        posterior,
        zero_messages,
    }
}

fn tv(a: &Message, b: &Message) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// One synchronous round: every cell computes its outgoing messages from
/// the round-`t` incoming messages, which are then routed to the neighbors
/// as round-`t + 1` incoming messages. `damping` mixes in the old message.
pub fn bp_round(
    layout: &LevelLayout,
    plan: &Plan,
    models: &[ErrorModel],
    syndromes: &[u8],
    msgs: &MessageSet,
    damping: f64,
    parallel: bool,
) -> (MessageSet, RoundStats) {
    let update = |c: usize| cell_update(layout, plan, &models[c], syndromes[c], &msgs.incoming[c]);
    let updates: Vec<CellUpdate> = if parallel {
        (0..layout.num_cells()).into_par_iter().map(update).collect()
    } else {
        (0..layout.num_cells()).map(update).collect()
    };
    let mut next = msgs.incoming.clone();
    let mut stats = RoundStats::default();
    for (c, u) in updates.iter().enumerate() {
        stats.zero_messages += u.zero_messages;
        for k in 0..SHARED_SLOTS {
            let (nc, nk) = layout.routes[c][k];
            let old = msgs.incoming[nc][nk];
            let mut m = u.outgoing[k];
            if damping > 0.0 {
                for a in 0..4 {
                    m[a] = (1.0 - damping) * m[a] + damping * old[a];
                }
            }
            next[nc][nk] = m;
        }
    }
    let mut total = 0.0;
    for (new, old) in next.iter().zip(&msgs.incoming) {
        for k in 0..SHARED_SLOTS {
            let d = tv(&new[k], &old[k]);
            stats.max_change = stats.max_change.max(d);
            total += d;
        }
    }
    stats.mean_change = total / (next.len() * SHARED_SLOTS).max(1) as f64;
    (
        MessageSet {
            round: msgs.round + 1,
            incoming: next,
        },
        stats,
    )
}

/// Runs `rounds` rounds from uniform messages.
pub fn run_bp(
    layout: &LevelLayout,
    plan: &Plan,
    models: &[ErrorModel],
    syndromes: &[u8],
    rounds: usize,
    damping: f64,
    parallel: bool,
) -> (MessageSet, Vec<RoundStats>) {
    let mut msgs = init_messages(layout.num_cells());
    let mut stats = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let (next, s) = bp_round(layout, plan, models, syndromes, &msgs, damping, parallel);
        msgs = next;
        stats.push(s);
    }
    (msgs, stats)
}

/// CSV of per-round message changes: `level,ell,round,max_change,mean_change,zero_messages`.
pub fn stats_csv(levels: &[(usize, Vec<RoundStats>)]) -> String {
    let mut s = String::from("level,ell,round,max_change,mean_change,zero_messages\n");
    for (level, (ell, rounds)) in levels.iter().enumerate() {
        for (r, st) in rounds.iter().enumerate() {
            writeln!(
                s,
                "{level},{ell},{},{:.6e},{:.6e},{}",
                r + 1,
                st.max_change,
                st.mean_change,
                st.zero_messages
            )
            .unwrap();
        }
    }
    s
}
