//! Dynap-se text artifacts: input spike files, NetParser connectivity files
//! and bias tables, plus the DPI synapse model behind the fast-synapse
//! tuning heuristic.

mod bias;
mod dpi;
mod event;
mod netparser;

pub use bias::{
    apply_heuristic1, bias_preset, parse_bias_file, write_bias_file, BiasEntry, BiasTable,
    BIAS_NAMES, HEURISTIC1_PARAMS,
};
pub use dpi::{dpi_rate, dpi_rate_squared, dpi_tau, DpiParams};
pub use event::{
    decode_event, encode_event, events_to_spikes, parse_spike_file, seconds_to_units,
    spikes_to_events, units_to_seconds, write_spike_file, DynapseEvent, SpikeFileEntry,
    MAX_ENCODED,
};
pub use netparser::{
    check_cam_budget, lines_to_weights, neuron_address, parse_netparser, synapse_speed_assign,
    synapse_type, weights_to_lines, write_netparser, CamReport, CamUsage, ConnectionLine,
    NeuronAddress, Role, Speed, SynapseType, CAM_LIMIT,
};
