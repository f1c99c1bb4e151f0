//! Link rates, transmission and propagation delays, and the
//! distance-dependent packet-loss law applied along routes.

use rand::RngExt;

use crate::constants::SPEED_OF_LIGHT_KM_S;
use crate::error::Error;
use crate::topology::{LinkClass, RoutePath};

/// How loss draws are applied along a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossMode {
    /// One Bernoulli trial per link traversal per message.
    PerHop,
    /// One independent trial per packet per link; the message is split into
    /// `ceil(payload / packet_size)` packets.
    PerPacket,
}

/// Rates per link class plus the parameters of the loss law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    /// Optical intra-plane ISL rate (bit/s).
    pub rate_fso_intra_bps: f64,
    /// Radio inter-plane ISL rate (bit/s).
    pub rate_rf_inter_bps: f64,
    /// Radio downlink rate (bit/s).
    pub rate_rf_downlink_bps: f64,
    /// Loss probability floor (at zero distance).
    pub p_min: f64,
    /// Loss probability ceiling (at large distance).
    pub p_max: f64,
    /// Distance normalization of the loss law (km); `d_max - d_min` scales the
    /// exponential decay.
    pub d_min_km: f64,
    pub d_max_km: f64,
    pub loss_mode: LossMode,
    /// Packet size used by [`LossMode::PerPacket`] (bits).
    pub packet_size_bits: f64,
}

impl LinkModel {
    pub fn validate(&self) -> Result<(), Error> {
        for (key, rate) in [
            ("rate_fso_intra_bps", self.rate_fso_intra_bps),
            ("rate_rf_inter_bps", self.rate_rf_inter_bps),
            ("rate_rf_downlink_bps", self.rate_rf_downlink_bps),
        ] {
            if !(rate > 0.0) {
                return Err(Error::validation(key, format!("must be > 0 (got {rate})")));
            }
        }
        if !(0.0..=1.0).contains(&self.p_min) || !(0.0..=1.0).contains(&self.p_max) || self.p_min > self.p_max {
            return Err(Error::validation(
                "p_min/p_max",
                format!("need 0 <= p_min <= p_max <= 1 (got {} and {})", self.p_min, self.p_max),
            ));
        }
        if !(self.d_min_km < self.d_max_km) {
            return Err(Error::validation(
                "d_min_km/d_max_km",
                format!("need d_min < d_max (got {} and {})", self.d_min_km, self.d_max_km),
            ));
        }
        if self.loss_mode == LossMode::PerPacket && !(self.packet_size_bits > 0.0) {
            return Err(Error::validation(
                "packet_size_bits",
                format!("per-packet losses need a positive packet size (got {})", self.packet_size_bits),
            ));
        }
        Ok(())
    }

    pub fn rate_for(&self, class: LinkClass) -> f64 {
        match class {
            LinkClass::IntraPlane => self.rate_fso_intra_bps,
            LinkClass::InterPlane => self.rate_rf_inter_bps,
            LinkClass::Downlink => self.rate_rf_downlink_bps,
        }
    }
}

/// Loss probability of one link of length `d_km`:
/// `P = P_max + (P_min − P_max) · exp(−d / (d_max − d_min))`.
/// Strictly increasing in the distance, from `P_min` at zero towards `P_max`.
pub fn packet_loss_prob(d_km: f64, model: &LinkModel) -> Result<f64, Error> {
    if !(model.d_max_km > model.d_min_km) {
        return Err(Error::validation(
            "d_min_km/d_max_km",
            format!("need d_min < d_max (got {} and {})", model.d_min_km, model.d_max_km),
        ));
    }
    if d_km < 0.0 {
        return Err(Error::Domain(format!("link distance must be nonnegative (got {d_km})")));
    }
    let scale = model.d_max_km - model.d_min_km;
    // Rearranged so that d = 0 yields exactly p_min in floating point.
    Ok(model.p_min + (model.p_max - model.p_min) * (1.0 - (-d_km / scale).exp()))
}

/// Total transmission time of a message crossing several links, each link
/// forwarding `bits_per_link` at `rates_bps`: the sum of the per-link times.
pub fn transmission_time(bits_per_link: &[f64], rates_bps: &[f64]) -> f64 {
    debug_assert_eq!(bits_per_link.len(), rates_bps.len());
    bits_per_link.iter().zip(rates_bps).map(|(bits, rate)| bits / rate).sum()
}

/// Propagation delay over the hop distances, at the speed of light.
pub fn propagation_time(hop_distances_km: &[f64]) -> f64 {
    hop_distances_km.iter().sum::<f64>() / SPEED_OF_LIGHT_KM_S
}

/// Draws the loss outcome of carrying `payload_bits` along `path`, including
/// its downlink hop when present. Per-hop mode plays one Bernoulli per link;
/// per-packet mode multiplies the per-packet survival over
/// `ceil(payload / packet_size)` packets and plays the aggregate per link,
/// which leaves the delivered/lost distribution identical to drawing every
/// packet separately.
pub fn evaluate_route_loss<R: RngExt>(
    rng: &mut R,
    path: &RoutePath,
    payload_bits: f64,
    model: &LinkModel,
) -> Result<bool, Error> {
    let packets = match model.loss_mode {
        LossMode::PerHop => 1.0,
        LossMode::PerPacket => (payload_bits / model.packet_size_bits).ceil().max(1.0),
    };
    for &d in path.hop_km.iter().chain(path.downlink_km.iter()) {
        let p_loss = packet_loss_prob(d, model)?;
        let survive = (1.0 - p_loss).powf(packets);
        if rng.random::<f64>() >= survive {
            return Ok(false);
        }
    }
    Ok(true)
}
