use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::tensor::{Frame, Shape};

/// Fixed-capacity history of frames, newest first.
///
/// Slot 0 is the most recent frame. Once `capacity` frames are stored, each
/// push evicts the oldest one.
#[derive(Debug, Clone)]
pub struct FrameBuffer<T> {
    capacity: usize,
    slots: VecDeque<T>,
}

impl<T: Frame> FrameBuffer<T> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidShape(
                "frame buffer capacity must be at least 1".into(),
            ));
        }
        Ok(Self {
            capacity,
            slots: VecDeque::with_capacity(capacity),
        })
    }

    /// Stores `frame` as slot 0 and returns the evicted frame, if any.
    pub fn push(&mut self, frame: T) -> Result<Option<T>> {
        if let Some(expected) = self.shape() {
            let actual = frame.shape();
            if actual != expected {
                return Err(Error::ShapeMismatch { expected, actual });
            }
        }
        let evicted = if self.slots.len() == self.capacity {
            self.slots.pop_back()
        } else {
            None
        };
        self.slots.push_front(frame);
        Ok(evicted)
    }

    pub fn shape(&self) -> Option<Shape> {
        self.slots.front().map(Frame::shape)
    }
}

impl<T> FrameBuffer<T> {
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.slots.len() == self.capacity
    }

    /// The frame `age` steps in the past (`0` = newest).
    pub fn get(&self, age: usize) -> Option<&T> {
        self.slots.get(age)
    }

    pub fn present(&self) -> Option<&T> {
        self.slots.front()
    }

    /// Frames from newest to oldest.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = &T> + '_ {
        self.slots.iter()
    }

    pub fn clear(&mut self) {
        self.slots.clear();
    }
}
