//! Stderr logging plus an optional sink that collects warnings and errors
//! for the run's `errors.log`.

use std::fs::File;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use log::{Level, LevelFilter, Log, Metadata, Record};

struct Logger {
    /// `LevelFilter as usize`.
    console: AtomicUsize,
    sink: Mutex<Option<File>>,
}

static LOGGER: Logger = Logger {
    console: AtomicUsize::new(LevelFilter::Warn as usize),
    sink: Mutex::new(None),
};

impl Logger {
    fn shows(&self, level: Level) -> bool {
        (level as usize) <= self.console.load(Ordering::Relaxed)
    }
}

impl Log for Logger {
    fn enabled(&self, metadata: &Metadata) -> bool {
        self.shows(metadata.level()) || metadata.level() <= Level::Warn
    }

    fn log(&self, record: &Record) {
        if self.shows(record.level()) {
            eprintln!("[{}] {}", record.level(), record.args());
        }
        if record.level() <= Level::Warn {
            if let Some(f) = self.sink.lock().expect("log sink").as_mut() {
                let _ = writeln!(
                    f,
                    "[{}] {}: {}",
                    record.level(),
                    record.target(),
                    record.args()
                );
            }
        }
    }

    fn flush(&self) {
        if let Some(f) = self.sink.lock().expect("log sink").as_mut() {
            let _ = f.flush();
        }
    }
}

/// `verbosity`: negative quiet, 0 warnings, 1 info, 2+ debug.
pub fn init(verbosity: i8) {
    let console = match verbosity {
        i8::MIN..=-1 => LevelFilter::Error,
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    LOGGER.console.store(console as usize, Ordering::Relaxed);
    if log::set_logger(&LOGGER).is_ok() {
        // Warnings always reach the sink.
        log::set_max_level(console.max(LevelFilter::Warn));
    }
}

/// Starts copying warnings and errors into `file`.
pub fn attach_sink(file: File) {
    *LOGGER.sink.lock().expect("log sink") = Some(file);
}

pub fn flush() {
    LOGGER.flush();
}
