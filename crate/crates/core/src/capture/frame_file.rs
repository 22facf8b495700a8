//! Line-delimited JSON frame files: one [`SkeletonFrame`] object per line.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use super::{CaptureError, FrameSource};
use crate::model::{validate_frame, FrameRejection, SkeletonFrame};

/// Replays frames from a reader, validating each one as it is read.
pub struct ReplaySource<R> {
    lines: io::Lines<R>,
    line_no: usize,
    prev_ts: Option<u64>,
    ended: bool,
}

/// Opens a frame file for replay.
pub fn open_replay(path: impl AsRef<Path>) -> Result<ReplaySource<BufReader<File>>, CaptureError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CaptureError::FileNotFound(path.to_path_buf()),
        _ => CaptureError::Io(e),
    })?;
    Ok(ReplaySource::new(BufReader::new(file)))
}

impl<R: BufRead> ReplaySource<R> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line_no: 0,
            prev_ts: None,
            ended: false,
        }
    }

    fn read_next(&mut self) -> Option<Result<SkeletonFrame, CaptureError>> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(CaptureError::Io(e))),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let line_no = self.line_no;
            let frame: SkeletonFrame = match serde_json::from_str(&line) {
                Ok(f) => f,
                Err(e) => {
                    return Some(Err(CaptureError::MalformedRecord {
                        line: line_no,
                        reason: e.to_string(),
                    }))
                }
            };
            return Some(match validate_frame(frame, self.prev_ts) {
                Ok(valid) => {
                    self.prev_ts = Some(valid.ts_us);
                    Ok(valid.into_inner())
                }
                Err(FrameRejection::NonMonotonicTimestamp { ts_us, prev_us }) => {
                    Err(CaptureError::NonMonotonicTimestamp {
                        line: line_no,
                        ts_us,
                        prev_us,
                    })
                }
                Err(rejection) => Err(CaptureError::MalformedRecord {
                    line: line_no,
                    reason: rejection.to_string(),
                }),
            });
        }
    }
}

impl<R: BufRead> FrameSource for ReplaySource<R> {
    fn next_frame(&mut self) -> Option<Result<SkeletonFrame, CaptureError>> {
        if self.ended {
            return None;
        }
        let item = self.read_next();
        // an error or end-of-file ends the stream for good
        if !matches!(item, Some(Ok(_))) {
            self.ended = true;
        }
        item
    }
}

impl<R: BufRead> Iterator for ReplaySource<R> {
    type Item = Result<SkeletonFrame, CaptureError>;
    fn next(&mut self) -> Option<Self::Item> {
        self.next_frame()
    }
}

pub fn encode_frame(frame: &SkeletonFrame) -> String {
    serde_json::to_string(frame).expect("frames always serialize")
}

pub fn write_frames<'a, W: Write>(
    mut out: W,
    frames: impl IntoIterator<Item = &'a SkeletonFrame>,
) -> io::Result<()> {
    for f in frames {
        out.write_all(encode_frame(f).as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_frame_file(path: impl AsRef<Path>, frames: &[SkeletonFrame]) -> io::Result<()> {
    let file = File::create(path)?;
    write_frames(io::BufWriter::new(file), frames)
}
