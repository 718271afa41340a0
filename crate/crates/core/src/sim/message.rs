use crate::graph::Port;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Message {
    pub payload: Vec<u8>,
}

impl Message {
    pub fn new(payload: Vec<u8>) -> Self {
        Message { payload }
    }

    /// Size on the wire: eight bits per payload byte.
    pub fn bits(&self) -> usize {
        8 * self.payload.len()
    }
}

pub fn message_bits(msg: &Message) -> usize {
    msg.bits()
}

/// Messages received in the current round, indexed by local port.
#[derive(Debug, Clone, Default)]
pub struct Inbox {
    slots: Vec<Option<Message>>,
}

impl Inbox {
    pub(crate) fn new(degree: usize) -> Self {
        Inbox { slots: vec![None; degree] }
    }

    pub(crate) fn put(&mut self, port: Port, msg: Message) {
        self.slots[port] = Some(msg);
    }

    pub(crate) fn clear(&mut self) {
        self.slots.iter_mut().for_each(|s| *s = None);
    }

    pub fn get(&self, port: Port) -> Option<&Message> {
        self.slots.get(port).and_then(Option::as_ref)
    }

    /// `(port, message)` pairs in port order.
    pub fn iter(&self) -> impl Iterator<Item = (Port, &Message)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(p, m)| m.as_ref().map(|m| (p, m)))
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(Option::is_none)
    }
}

/// At most one message per port per round.
#[derive(Debug, Clone, Default)]
pub struct Outbox {
    slots: Vec<Option<Message>>,
}

impl Outbox {
    pub(crate) fn new(degree: usize) -> Self {
        Outbox { slots: vec![None; degree] }
    }

    pub fn degree(&self) -> usize {
        self.slots.len()
    }

    /// Queues `msg` on `port`, replacing anything queued there this round.
    ///
    /// # Panics
    /// If `port` is not a port of this vertex.
    pub fn send(&mut self, port: Port, msg: Message) {
        assert!(port < self.slots.len(), "port {port} out of range (degree {})", self.slots.len());
        self.slots[port] = Some(msg);
    }

    pub fn broadcast(&mut self, msg: &Message) {
        for slot in &mut self.slots {
            *slot = Some(msg.clone());
        }
    }

    pub(crate) fn drain(&mut self) -> impl Iterator<Item = (Port, Message)> + '_ {
        self.slots
            .iter_mut()
            .enumerate()
            .filter_map(|(p, m)| m.take().map(|m| (p, m)))
    }
}
