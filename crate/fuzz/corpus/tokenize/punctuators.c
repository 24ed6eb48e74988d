a ## b ... <<= >>= -> ++ -- %:%: <: :> <% %>
/* c */ // d
