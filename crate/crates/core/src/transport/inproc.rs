use std::collections::VecDeque;

use super::{ProtocolError, Transport};

/// One FIFO queue per destination agent.
#[derive(Debug, Clone)]
pub struct InProcessTransport {
    queues: Vec<VecDeque<Vec<u8>>>,
}

impl InProcessTransport {
    pub fn new(num_agents: usize) -> Self {
        Self { queues: vec![VecDeque::new(); num_agents] }
    }

    fn queue(&mut self, agent: usize) -> Result<&mut VecDeque<Vec<u8>>, ProtocolError> {
        self.queues
            .get_mut(agent)
            .ok_or_else(|| ProtocolError::ConnectionLost { agent, reason: "no such agent".into() })
    }
}

impl Transport for InProcessTransport {
    fn send(&mut self, _from: usize, to: usize, frame: &[u8]) -> Result<(), ProtocolError> {
        self.queue(to)?.push_back(frame.to_vec());
        Ok(())
    }

    fn recv(&mut self, at: usize) -> Result<Vec<u8>, ProtocolError> {
        self.queue(at)?.pop_front().ok_or(ProtocolError::NothingPending { agent: at })
    }
}
