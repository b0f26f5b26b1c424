use std::fmt::Write as _;

use urdd_store::schema::{GeometryRef, JointType, Pose, Shape};

use super::RobotModel;

/// Render a model back to URDF XML.
///
/// Pass-through elements are re-emitted inside the element they came from;
/// robot-level ones come first. Namespaced pass-through attributes are kept
/// in the URDF module only, since their prefixes are not recorded.
pub fn to_urdf_xml(model: &RobotModel) -> String {
    let mut w = Writer {
        model,
        out: String::new(),
    };
    w.out.push_str("<?xml version=\"1.0\"?>\n");
    let _ = writeln!(w.out, "<robot name=\"{}\"{}>", esc(model.name()), w.attrs("robot"));
    w.raws("robot", 1);
    for link in model.links() {
        let ctx = format!("link:{}", link.name);
        let _ = writeln!(w.out, "  <link name=\"{}\"{}>", esc(&link.name), w.attrs(&ctx));
        if let Some(inertial) = &link.inertial {
            let ictx = format!("{ctx}/inertial");
            let _ = writeln!(w.out, "    <inertial{}>", w.attrs(&ictx));
            w.origin(&inertial.origin, &format!("{ictx}/origin"), 3);
            let _ = writeln!(
                w.out,
                "      <mass value=\"{}\"{}/>",
                inertial.mass,
                w.attrs(&format!("{ictx}/mass"))
            );
            let t = &inertial.inertia;
            let _ = writeln!(
                w.out,
                "      <inertia ixx=\"{}\" ixy=\"{}\" ixz=\"{}\" iyy=\"{}\" iyz=\"{}\" izz=\"{}\"{}/>",
                t.ixx,
                t.ixy,
                t.ixz,
                t.iyy,
                t.iyz,
                t.izz,
                w.attrs(&format!("{ictx}/inertia"))
            );
            w.raws(&ictx, 3);
            w.out.push_str("    </inertial>\n");
        }
        for (i, g) in link.visual_geometries.iter().enumerate() {
            w.geometry("visual", g, &format!("{ctx}/visual:{i}"));
        }
        for (i, g) in link.collision_geometries.iter().enumerate() {
            w.geometry("collision", g, &format!("{ctx}/collision:{i}"));
        }
        w.raws(&ctx, 2);
        w.out.push_str("  </link>\n");
    }
    for joint in model.joints() {
        let ctx = format!("joint:{}", joint.name);
        let _ = writeln!(
            w.out,
            "  <joint name=\"{}\" type=\"{}\"{}>",
            esc(&joint.name),
            joint.joint_type.as_str(),
            w.attrs(&ctx)
        );
        let _ = writeln!(
            w.out,
            "    <parent link=\"{}\"{}/>",
            esc(&joint.parent_link),
            w.attrs(&format!("{ctx}/parent"))
        );
        let _ = writeln!(
            w.out,
            "    <child link=\"{}\"{}/>",
            esc(&joint.child_link),
            w.attrs(&format!("{ctx}/child"))
        );
        w.origin(&joint.origin, &format!("{ctx}/origin"), 2);
        let [x, y, z] = joint.axis;
        let _ = writeln!(
            w.out,
            "    <axis xyz=\"{x} {y} {z}\"{}/>",
            w.attrs(&format!("{ctx}/axis"))
        );
        if let Some(l) = &joint.limits {
            let mut attrs = String::new();
            if matches!(joint.joint_type, JointType::Revolute | JointType::Prismatic) {
                let _ = write!(
                    attrs,
                    " lower=\"{}\" upper=\"{}\"",
                    l.lower.unwrap_or(0.0),
                    l.upper.unwrap_or(0.0)
                );
            }
            if let Some(v) = l.velocity {
                let _ = write!(attrs, " velocity=\"{v}\"");
            }
            if let Some(e) = l.effort {
                let _ = write!(attrs, " effort=\"{e}\"");
            }
            let _ = writeln!(w.out, "    <limit{attrs}{}/>", w.attrs(&format!("{ctx}/limit")));
        }
        if let Some(m) = &joint.mimic {
            let _ = writeln!(
                w.out,
                "    <mimic joint=\"{}\" multiplier=\"{}\" offset=\"{}\"{}/>",
                esc(&m.source_joint),
                m.multiplier,
                m.offset,
                w.attrs(&format!("{ctx}/mimic"))
            );
        }
        w.raws(&ctx, 2);
        w.out.push_str("  </joint>\n");
    }
    w.out.push_str("</robot>\n");
    w.out
}

struct Writer<'a> {
    model: &'a RobotModel,
    out: String,
}

impl Writer<'_> {
    fn attrs(&self, context: &str) -> String {
        let mut s = String::new();
        for a in &self.model.passthrough().attributes {
            if a.context == context && !a.name.starts_with('{') {
                let _ = write!(s, " {}=\"{}\"", a.name, esc(&a.value));
            }
        }
        s
    }

    fn raws(&mut self, context: &str, depth: usize) {
        for e in &self.model.passthrough().elements {
            if e.context == context {
                let _ = writeln!(self.out, "{}{}", "  ".repeat(depth), e.xml);
            }
        }
    }

    fn origin(&mut self, pose: &Pose, ctx: &str, depth: usize) {
        let [x, y, z] = pose.xyz;
        let [r, p, yaw] = pose.rpy;
        let attrs = self.attrs(ctx);
        let _ = writeln!(
            self.out,
            "{}<origin xyz=\"{x} {y} {z}\" rpy=\"{r} {p} {yaw}\"{attrs}/>",
            "  ".repeat(depth)
        );
        let inner: Vec<String> = self
            .model
            .passthrough()
            .elements
            .iter()
            .filter(|e| e.context == ctx)
            .map(|e| e.xml.clone())
            .collect();
        if !inner.is_empty() {
            // Children of <origin> are unusual; keep them but as siblings.
            self.out.truncate(self.out.len() - 3);
            self.out.push_str(">\n");
            for x in inner {
                let _ = writeln!(self.out, "{}  {x}", "  ".repeat(depth));
            }
            let _ = writeln!(self.out, "{}</origin>", "  ".repeat(depth));
        }
    }

    fn geometry(&mut self, tag: &str, g: &GeometryRef, ctx: &str) {
        let name = g
            .name
            .as_ref()
            .map(|n| format!(" name=\"{}\"", esc(n)))
            .unwrap_or_default();
        let attrs = self.attrs(ctx);
        let _ = writeln!(self.out, "    <{tag}{name}{attrs}>");
        self.origin(&g.origin, &format!("{ctx}/origin"), 3);
        let gctx = format!("{ctx}/geometry");
        let _ = writeln!(self.out, "      <geometry{}>", self.attrs(&gctx));
        let shape = match &g.shape {
            Shape::Mesh { filename, scale } => format!(
                "<mesh filename=\"{}\" scale=\"{} {} {}\"{}/>",
                esc(filename),
                scale[0],
                scale[1],
                scale[2],
                self.attrs(&format!("{gctx}/mesh"))
            ),
            Shape::Box { half_extents: h } => format!(
                "<box size=\"{} {} {}\"{}/>",
                2.0 * h[0],
                2.0 * h[1],
                2.0 * h[2],
                self.attrs(&format!("{gctx}/box"))
            ),
            Shape::Cylinder { radius, length } => format!(
                "<cylinder radius=\"{radius}\" length=\"{length}\"{}/>",
                self.attrs(&format!("{gctx}/cylinder"))
            ),
            Shape::Capsule { radius, length } => format!(
                "<capsule radius=\"{radius}\" length=\"{length}\"{}/>",
                self.attrs(&format!("{gctx}/capsule"))
            ),
            Shape::Sphere { radius } => format!(
                "<sphere radius=\"{radius}\"{}/>",
                self.attrs(&format!("{gctx}/sphere"))
            ),
        };
        let _ = writeln!(self.out, "        {shape}");
        self.raws(&gctx, 4);
        self.out.push_str("      </geometry>\n");
        self.raws(ctx, 3);
        let _ = writeln!(self.out, "    </{tag}>");
    }
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}
