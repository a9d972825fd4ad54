//! Audio statuses, stream usages and the focus arbitration policy.
//!
//! A conflict always involves a "pre" stream (the one that was playing first)
//! and a "post" stream (the one that starts later). The system-wide policy is a
//! [`ResolutionMatrix`] indexed by the two stream usages; individual apps may
//! override their own side of the outcome through a [`ReactionTable`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Playback status of an app's audio stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AudioStatus {
    Stop,
    Pause,
    Play,
    /// Volume lowered while a conflict lasts; restored afterwards.
    Duck,
    /// Paused while a conflict lasts; playback resumes afterwards.
    PauseResume,
}

impl AudioStatus {
    pub const ALL: [AudioStatus; 5] = [
        AudioStatus::Stop,
        AudioStatus::Pause,
        AudioStatus::Play,
        AudioStatus::Duck,
        AudioStatus::PauseResume,
    ];

    /// Statuses that are audible now or will become audible once a conflict ends.
    pub fn is_play_like(self) -> bool {
        matches!(
            self,
            AudioStatus::Play | AudioStatus::Duck | AudioStatus::PauseResume
        )
    }

    /// Statuses that only exist while another stream holds focus.
    pub fn is_conflict_only(self) -> bool {
        matches!(self, AudioStatus::Duck | AudioStatus::PauseResume)
    }

    fn restrictiveness(self) -> u8 {
        match self {
            AudioStatus::Play => 0,
            AudioStatus::Duck => 1,
            AudioStatus::PauseResume => 2,
            AudioStatus::Pause => 3,
            AudioStatus::Stop => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AudioStatus::Stop => "STOP",
            AudioStatus::Pause => "PAUSE",
            AudioStatus::Play => "PLAY",
            AudioStatus::Duck => "DUCK",
            AudioStatus::PauseResume => "PAUSE_RESUME",
        }
    }
}

impl fmt::Display for AudioStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Merge two statuses imposed by separate conflicts, keeping the stronger one.
///
/// Order: `STOP > PAUSE > PAUSE_RESUME > DUCK > PLAY`.
pub fn most_restrictive(a: AudioStatus, b: AudioStatus) -> AudioStatus {
    if b.restrictiveness() > a.restrictiveness() {
        b
    } else {
        a
    }
}

/// Declared type of an audio stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StreamUsage {
    #[serde(rename = "MUSIC")]
    Music,
    #[serde(rename = "MOVIE")]
    Movie,
    #[serde(rename = "NAVIG")]
    Navig,
    #[serde(rename = "COMMU")]
    Commu,
}

impl StreamUsage {
    pub const ALL: [StreamUsage; 4] = [
        StreamUsage::Music,
        StreamUsage::Movie,
        StreamUsage::Navig,
        StreamUsage::Commu,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StreamUsage::Music => "MUSIC",
            StreamUsage::Movie => "MOVIE",
            StreamUsage::Navig => "NAVIG",
            StreamUsage::Commu => "COMMU",
        }
    }

    pub fn parse(s: &str) -> Option<StreamUsage> {
        StreamUsage::ALL
            .into_iter()
            .find(|u| u.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for StreamUsage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One cell of the resolution matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ResolutionOutcome {
    StopPre,
    DuckPre,
    DuckPost,
    PausePre,
    PlayBoth,
}

impl ResolutionOutcome {
    pub const ALL: [ResolutionOutcome; 5] = [
        ResolutionOutcome::StopPre,
        ResolutionOutcome::DuckPre,
        ResolutionOutcome::DuckPost,
        ResolutionOutcome::PausePre,
        ResolutionOutcome::PlayBoth,
    ];

    /// `(pre status, post status)` produced by this outcome.
    pub fn statuses(self) -> (AudioStatus, AudioStatus) {
        use AudioStatus::*;
        match self {
            ResolutionOutcome::StopPre => (Stop, Play),
            ResolutionOutcome::DuckPre => (Duck, Play),
            ResolutionOutcome::DuckPost => (Play, Duck),
            ResolutionOutcome::PausePre => (PauseResume, Play),
            ResolutionOutcome::PlayBoth => (Play, Play),
        }
    }
}

/// Total mapping `(pre usage, post usage) -> outcome`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRows", into = "MatrixRows")]
pub struct ResolutionMatrix {
    cells: [[ResolutionOutcome; 4]; 4],
}

type MatrixRows = BTreeMap<StreamUsage, BTreeMap<StreamUsage, ResolutionOutcome>>;

impl ResolutionMatrix {
    pub fn get(&self, pre: StreamUsage, post: StreamUsage) -> ResolutionOutcome {
        self.cells[pre.index()][post.index()]
    }

    pub fn set(&mut self, pre: StreamUsage, post: StreamUsage, outcome: ResolutionOutcome) {
        self.cells[pre.index()][post.index()] = outcome;
    }
}

impl Default for ResolutionMatrix {
    /// The platform's typical resolutions.
    fn default() -> Self {
        use ResolutionOutcome::*;
        let media = [StopPre, StopPre, DuckPre, PausePre];
        Self {
            cells: [
                media,
                media,
                [DuckPost, DuckPost, StopPre, StopPre],
                [DuckPost, DuckPost, PlayBoth, PausePre],
            ],
        }
    }
}

impl TryFrom<MatrixRows> for ResolutionMatrix {
    type Error = String;

    fn try_from(rows: MatrixRows) -> Result<Self, Self::Error> {
        let mut matrix = ResolutionMatrix::default();
        for pre in StreamUsage::ALL {
            let row = rows
                .get(&pre)
                .ok_or_else(|| format!("matrix row {pre} is missing"))?;
            for post in StreamUsage::ALL {
                let cell = row
                    .get(&post)
                    .ok_or_else(|| format!("matrix cell {pre}x{post} is missing"))?;
                matrix.set(pre, post, *cell);
            }
        }
        Ok(matrix)
    }
}

impl From<ResolutionMatrix> for MatrixRows {
    fn from(m: ResolutionMatrix) -> Self {
        StreamUsage::ALL
            .into_iter()
            .map(|pre| {
                let row = StreamUsage::ALL
                    .into_iter()
                    .map(|post| (post, m.get(pre, post)))
                    .collect();
                (pre, row)
            })
            .collect()
    }
}

/// Which of an app's reaction tables applies to a conflict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactionVariant {
    Normal,
    /// The conflict was caused by a hop onto or back to a device.
    Hopping,
}

/// Per-app deviations from the resolution matrix.
///
/// `as_pre` is keyed by the usage of the incoming stream, `as_post` by the
/// usage of the stream that was already playing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionTable {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub as_pre: BTreeMap<StreamUsage, AudioStatus>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub as_post: BTreeMap<StreamUsage, AudioStatus>,
}

impl ReactionTable {
    pub fn is_empty(&self) -> bool {
        self.as_pre.is_empty() && self.as_post.is_empty()
    }

    pub fn with_pre(mut self, incoming: StreamUsage, status: AudioStatus) -> Self {
        self.as_pre.insert(incoming, status);
        self
    }

    pub fn with_post(mut self, existing: StreamUsage, status: AudioStatus) -> Self {
        self.as_post.insert(existing, status);
        self
    }
}

/// Resolve a conflict between an earlier stream and a later one.
///
/// Returns `(pre status, post status)`.
pub fn arbitrate(
    pre_usage: StreamUsage,
    pre_reaction: Option<&ReactionTable>,
    post_usage: StreamUsage,
    post_reaction: Option<&ReactionTable>,
    matrix: &ResolutionMatrix,
) -> (AudioStatus, AudioStatus) {
    let (mut pre, mut post) = matrix.get(pre_usage, post_usage).statuses();
    if let Some(s) = pre_reaction.and_then(|r| r.as_pre.get(&post_usage)) {
        pre = *s;
    }
    if let Some(s) = post_reaction.and_then(|r| r.as_post.get(&pre_usage)) {
        post = *s;
    }
    (pre, post)
}
