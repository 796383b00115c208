//! Protocol messages. Every message travels in an [`Envelope`] that names
//! its recipient and topic.

use crate::labels::Label;
use crate::pubsub::trie::{Bits, Publication, TrieSummary};

pub type NodeId = u32;
pub type TopicId = u32;

/// A `(label, node id)` pair as stored in neighbor variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledRef {
    pub label: Label,
    pub id: NodeId,
}

impl LabeledRef {
    pub fn new(label: Label, id: NodeId) -> LabeledRef {
        LabeledRef { label, id }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flag {
    Cyc,
    Lin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Addr {
    Supervisor,
    Node(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    /// `sender` checks that the recipient really holds `claimed`.
    Check {
        sender: LabeledRef,
        claimed: Label,
        flag: Flag,
    },
    Introduce {
        c: LabeledRef,
        flag: Flag,
    },
    Linearize {
        v: LabeledRef,
    },
    RemoveConnections {
        u: NodeId,
    },
    SetData {
        pred: Option<LabeledRef>,
        label: Option<Label>,
        succ: Option<LabeledRef>,
    },
    Subscribe {
        v: NodeId,
    },
    Unsubscribe {
        v: NodeId,
    },
    GetConfiguration {
        v: NodeId,
    },
    IntroduceShortcut {
        label: Label,
        v: NodeId,
    },
    CheckTrie {
        sender: NodeId,
        summaries: Vec<TrieSummary>,
    },
    CheckAndPublish {
        sender: NodeId,
        summaries: Vec<TrieSummary>,
        prefix: Bits,
    },
    Publish {
        pubs: Vec<Publication>,
    },
    PublishNew {
        p: Publication,
    },
    /// Failure detector to supervisor.
    CrashReport {
        v: NodeId,
    },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Check { .. } => "Check",
            Message::Introduce { .. } => "Introduce",
            Message::Linearize { .. } => "Linearize",
            Message::RemoveConnections { .. } => "RemoveConnections",
            Message::SetData { .. } => "SetData",
            Message::Subscribe { .. } => "Subscribe",
            Message::Unsubscribe { .. } => "Unsubscribe",
            Message::GetConfiguration { .. } => "GetConfiguration",
            Message::IntroduceShortcut { .. } => "IntroduceShortcut",
            Message::CheckTrie { .. } => "CheckTrie",
            Message::CheckAndPublish { .. } => "CheckAndPublish",
            Message::Publish { .. } => "Publish",
            Message::PublishNew { .. } => "PublishNew",
            Message::CrashReport { .. } => "CrashReport",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub to: Addr,
    pub topic: TopicId,
    pub msg: Message,
}

/// Messages emitted by one handler invocation, without topic.
pub type Outbox = Vec<(Addr, Message)>;
