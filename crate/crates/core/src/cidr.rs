//! Minimal CIDR parsing for firewall sources and route destinations.

use core::fmt;
use core::net::IpAddr;
use core::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cidr {
    pub addr: IpAddr,
    pub prefix_len: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum CidrError {
    #[error("invalid address")]
    Address,
    #[error("invalid prefix length")]
    Prefix,
}

impl Cidr {
    /// A zero-length prefix matches every address of its family.
    pub fn is_catch_all(&self) -> bool {
        self.prefix_len == 0
    }
}

impl FromStr for Cidr {
    type Err = CidrError;

    /// Parses `addr/len`; a bare address is a host prefix.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (addr, prefix) = match s.split_once('/') {
            Some((a, p)) => (a, Some(p)),
            None => (s, None),
        };
        let addr: IpAddr = addr.trim().parse().map_err(|_| CidrError::Address)?;
        let max = if addr.is_ipv4() { 32 } else { 128 };
        let prefix_len = match prefix {
            None => max,
            Some(p) => {
                if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(CidrError::Prefix);
                }
                let len: u8 = p.parse().map_err(|_| CidrError::Prefix)?;
                if len > max {
                    return Err(CidrError::Prefix);
                }
                len
            }
        };
        Ok(Cidr { addr, prefix_len })
    }
}

impl fmt::Display for Cidr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.addr, self.prefix_len)
    }
}

/// True when `s` parses and covers its whole address family
/// (`0.0.0.0/0`, `::/0`). Unparseable input is not a catch-all.
pub fn is_catch_all(s: &str) -> bool {
    s.parse::<Cidr>().map(|c| c.is_catch_all()).unwrap_or(false)
}
