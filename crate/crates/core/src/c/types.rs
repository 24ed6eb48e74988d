//! C types as seen by the analysis (qualifiers are not tracked).

use super::DeclId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntKind {
    Bool,
    Char,
    SChar,
    UChar,
    Short,
    UShort,
    Int,
    UInt,
    Long,
    ULong,
    LongLong,
    ULongLong,
    Int128,
    UInt128,
}

impl IntKind {
    /// Conversion rank; equal for signed/unsigned pairs.
    pub fn rank(self) -> u8 {
        use IntKind::*;
        match self {
            Bool => 0,
            Char | SChar | UChar => 1,
            Short | UShort => 2,
            Int | UInt => 3,
            Long | ULong => 4,
            LongLong | ULongLong => 5,
            Int128 | UInt128 => 6,
        }
    }

    pub fn is_unsigned(self) -> bool {
        use IntKind::*;
        matches!(self, Bool | UChar | UShort | UInt | ULong | ULongLong | UInt128)
    }

    /// Width in bits on an LP64 target.
    pub fn bits(self) -> u32 {
        use IntKind::*;
        match self {
            Bool => 1,
            Char | SChar | UChar => 8,
            Short | UShort => 16,
            Int | UInt => 32,
            Long | ULong | LongLong | ULongLong => 64,
            Int128 | UInt128 => 128,
        }
    }

    fn to_unsigned(self) -> IntKind {
        use IntKind::*;
        match self {
            Char | SChar => UChar,
            Short => UShort,
            Int => UInt,
            Long => ULong,
            LongLong => ULongLong,
            Int128 => UInt128,
            k => k,
        }
    }

    pub fn name(self) -> &'static str {
        use IntKind::*;
        match self {
            Bool => "_Bool",
            Char => "char",
            SChar => "signed char",
            UChar => "unsigned char",
            Short => "short",
            UShort => "unsigned short",
            Int => "int",
            UInt => "unsigned int",
            Long => "long",
            ULong => "unsigned long",
            LongLong => "long long",
            ULongLong => "unsigned long long",
            Int128 => "__int128",
            UInt128 => "unsigned __int128",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FloatKind {
    Float,
    Double,
    LongDouble,
}

impl FloatKind {
    pub fn name(self) -> &'static str {
        match self {
            FloatKind::Float => "float",
            FloatKind::Double => "double",
            FloatKind::LongDouble => "long double",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionType {
    pub ret: Type,
    pub params: Vec<Type>,
    pub variadic: bool,
    /// Declared without a prototype, `int f()`.
    pub unprototyped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Void,
    Int(IntKind),
    Float(FloatKind),
    /// `_Complex` of a floating type.
    Complex(FloatKind),
    Pointer(Box<Type>),
    Array(Box<Type>, Option<u64>),
    Function(Box<FunctionType>),
    /// Struct or union, identified by its first declaration.
    Record(DeclId),
    Enum(DeclId),
    /// A typedef name and the type it stands for.
    Typedef(DeclId, Box<Type>),
    /// `__builtin_va_list` and similar opaque builtins.
    Builtin(&'static str),
    /// Could not be determined.
    Error,
}

pub const INT: Type = Type::Int(IntKind::Int);

impl Type {
    pub fn pointer_to(t: Type) -> Type {
        Type::Pointer(Box::new(t))
    }

    /// Strip typedef sugar.
    pub fn canonical(&self) -> &Type {
        let mut t = self;
        while let Type::Typedef(_, inner) = t {
            t = inner;
        }
        t
    }

    pub fn is_void(&self) -> bool {
        matches!(self.canonical(), Type::Void)
    }

    pub fn is_integer(&self) -> bool {
        matches!(self.canonical(), Type::Int(_) | Type::Enum(_))
    }

    pub fn is_arithmetic(&self) -> bool {
        matches!(
            self.canonical(),
            Type::Int(_) | Type::Enum(_) | Type::Float(_) | Type::Complex(_)
        )
    }

    pub fn is_pointer(&self) -> bool {
        matches!(self.canonical(), Type::Pointer(_))
    }

    pub fn is_error(&self) -> bool {
        matches!(self.canonical(), Type::Error)
    }

    /// Pointee of a pointer or element of an array.
    pub fn pointee(&self) -> Option<&Type> {
        match self.canonical() {
            Type::Pointer(t) | Type::Array(t, _) => Some(t),
            _ => None,
        }
    }

    pub fn function(&self) -> Option<&FunctionType> {
        match self.canonical() {
            Type::Function(f) => Some(f),
            Type::Pointer(t) => match t.canonical() {
                Type::Function(f) => Some(f),
                _ => None,
            },
            _ => None,
        }
    }

    /// Array-to-pointer and function-to-pointer conversion.
    pub fn decay(&self) -> Type {
        match self.canonical() {
            Type::Array(t, _) => Type::Pointer(t.clone()),
            Type::Function(_) => Type::pointer_to(self.clone()),
            _ => self.clone(),
        }
    }

    /// Integer promotion; enums promote to `int`.
    pub fn promote(&self) -> Type {
        match self.canonical() {
            Type::Int(k) if k.rank() < IntKind::Int.rank() => INT,
            Type::Enum(_) => INT,
            _ => self.clone(),
        }
    }

    fn int_kind(&self) -> Option<IntKind> {
        match self.canonical() {
            Type::Int(k) => Some(*k),
            Type::Enum(_) => Some(IntKind::Int),
            _ => None,
        }
    }

    /// The declaration of a type after removing pointer and array layers:
    /// the typedef for typedef names, the first tag declaration for records
    /// and enums, nothing for builtin types.
    pub fn declaration(&self) -> Option<DeclId> {
        match self {
            Type::Pointer(t) | Type::Array(t, _) => t.declaration(),
            Type::Typedef(d, _) | Type::Record(d) | Type::Enum(d) => Some(*d),
            _ => None,
        }
    }
}

/// Usual arithmetic conversions.
pub fn usual_arithmetic(a: &Type, b: &Type) -> Type {
    let (ca, cb) = (a.canonical(), b.canonical());
    match (ca, cb) {
        (Type::Complex(x), Type::Complex(y)) => return Type::Complex((*x).max(*y)),
        (Type::Complex(x), Type::Float(y)) | (Type::Float(y), Type::Complex(x)) => {
            return Type::Complex((*x).max(*y))
        }
        (Type::Complex(x), _) | (_, Type::Complex(x)) => return Type::Complex(*x),
        (Type::Float(x), Type::Float(y)) => return Type::Float((*x).max(*y)),
        (Type::Float(x), _) | (_, Type::Float(x)) => return Type::Float(*x),
        _ => {}
    }
    let (Some(x), Some(y)) = (a.promote().int_kind(), b.promote().int_kind()) else {
        return Type::Error;
    };
    if x == y {
        return Type::Int(x);
    }
    if x.is_unsigned() == y.is_unsigned() {
        return Type::Int(if x.rank() >= y.rank() { x } else { y });
    }
    let (u, s) = if x.is_unsigned() { (x, y) } else { (y, x) };
    if u.rank() >= s.rank() {
        Type::Int(u)
    } else if s.bits() > u.bits() {
        Type::Int(s)
    } else {
        Type::Int(s.to_unsigned())
    }
}

/// Type of an integer constant from its spelling.
pub fn int_literal_type(text: &str) -> Type {
    let lower = text.to_ascii_lowercase();
    let body = lower.trim_end_matches(['u', 'l']);
    let suffix = &lower[body.len()..];
    let unsigned = suffix.contains('u');
    let longs = suffix.matches('l').count();
    let decimal = !(body.starts_with('0') && body.len() > 1);
    let value = if let Some(h) = body.strip_prefix("0x") {
        u128::from_str_radix(h, 16).ok()
    } else if let Some(b) = body.strip_prefix("0b") {
        u128::from_str_radix(b, 2).ok()
    } else if !decimal {
        u128::from_str_radix(&body[1..], 8).ok()
    } else {
        body.parse::<u128>().ok()
    }
    .unwrap_or(0);

    let candidates: &[IntKind] = match (longs, unsigned) {
        (0, false) if decimal => &[IntKind::Int, IntKind::Long, IntKind::LongLong],
        (0, false) => &[IntKind::Int, IntKind::UInt, IntKind::Long, IntKind::ULong, IntKind::LongLong, IntKind::ULongLong],
        (0, true) => &[IntKind::UInt, IntKind::ULong, IntKind::ULongLong],
        (1, false) if decimal => &[IntKind::Long, IntKind::LongLong],
        (1, false) => &[IntKind::Long, IntKind::ULong, IntKind::LongLong, IntKind::ULongLong],
        (1, true) => &[IntKind::ULong, IntKind::ULongLong],
        (_, false) if decimal => &[IntKind::LongLong],
        (_, false) => &[IntKind::LongLong, IntKind::ULongLong],
        (_, true) => &[IntKind::ULongLong],
    };
    for &k in candidates {
        let max: u128 = if k.is_unsigned() {
            (1u128 << k.bits()) - 1
        } else {
            (1u128 << (k.bits() - 1)) - 1
        };
        if value <= max {
            return Type::Int(k);
        }
    }
    Type::Int(*candidates.last().unwrap())
}

/// Value of an integer constant, if it parses.
pub fn int_literal_value(text: &str) -> Option<u64> {
    let lower = text.to_ascii_lowercase();
    let body = lower.trim_end_matches(['u', 'l']);
    if let Some(h) = body.strip_prefix("0x") {
        u64::from_str_radix(h, 16).ok()
    } else if let Some(b) = body.strip_prefix("0b") {
        u64::from_str_radix(b, 2).ok()
    } else if body.starts_with('0') && body.len() > 1 {
        u64::from_str_radix(&body[1..], 8).ok()
    } else {
        body.parse().ok()
    }
}

pub fn float_literal_type(text: &str) -> Type {
    let lower = text.to_ascii_lowercase();
    if lower.starts_with("0x") {
        // Hex floats end in an exponent, so `f` is a suffix only after `p`.
        if let Some(p) = lower.rfind('p') {
            let exp = &lower[p..];
            if exp.ends_with('f') {
                return Type::Float(FloatKind::Float);
            }
            if exp.ends_with('l') {
                return Type::Float(FloatKind::LongDouble);
            }
        }
        return Type::Float(FloatKind::Double);
    }
    if lower.ends_with('f') {
        Type::Float(FloatKind::Float)
    } else if lower.ends_with('l') {
        Type::Float(FloatKind::LongDouble)
    } else {
        Type::Float(FloatKind::Double)
    }
}

/// Whether a pp-number spells a floating constant.
pub fn is_float_literal(text: &str) -> bool {
    let lower = text.to_ascii_lowercase();
    if lower.starts_with("0x") {
        lower.contains('.') || lower.contains('p')
    } else {
        lower.contains('.') || lower.contains('e')
    }
}
